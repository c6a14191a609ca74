//! One function per command. Each fills a [`Report`]; a failing computation
//! becomes an error row plus an entry in `errors`, and the remaining groups
//! still run.

use discofield_core::clifford::{
    build_factor_matrices, build_gammas, constraint_gram_smallest, constraint_matrix,
    constraint_parameter_labels, constraint_residual, constraint_solve,
    diagonal_constraint_norm_sq, dirac_baseline_residual, relation_report, unitary_from,
    FactorMatrices,
};
use discofield_core::field::{
    assemble_fermion_operator, assemble_scalar_operator, factorization_product_check,
    fermion_residual_pointwise, fermion_svd, kg_baseline_residual, residuals_consistent,
    resonance_enumerate, scalar_residual_pointwise, tuple_mismatch, FieldBasis, FieldModel,
    QuantumTuple, ScalarSolution, SpinorCandidate,
};
use discofield_core::hermite::{
    eval_phi, eval_phi_momentum, fourier_by_quadrature, hermite_polynomial, inner_product_with,
    moment_with, variant_moments, ExponentVariant, GaussHermite, GaussianParams, HermiteState,
    MomentKind, QuadratureSpec,
};
use discofield_core::kron::multi_index;
use discofield_core::mass::{
    assembly_form_difference, build_mass_dispersion_grid, build_mass_ops, mass_commutator_residual,
};
use discofield_core::operator::{
    build_p2_mean, build_sigma_1d, build_sigma_grid, build_xp_ladder, commutator,
    deviation_from_scaled_identity, eigensolve, BasisSpec, GridSpec, OperatorMatrix,
};
use discofield_core::relativistic::{
    basis_width, build_sigma_tensor, commutation_check, contract_metric_sigma,
    contracted_eigenvalue, on_shell, CommutatorKind, FourMeans, ProductBasisSpec,
};
use discofield_core::scalar::{ci, cis};
use discofield_core::Error;
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::report::{obj, Check, Node, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    VerifyHermite,
    Spectrum1d,
    VerifyAlgebra,
    Constraint,
    Resonance,
    ScalarResidual,
    Factorization,
    FermionSvd,
    Baselines,
    All,
}

impl Command {
    /// Every suite in the order `all` runs them.
    pub const SUITES: [Command; 9] = [
        Command::VerifyHermite,
        Command::Spectrum1d,
        Command::VerifyAlgebra,
        Command::Constraint,
        Command::Resonance,
        Command::ScalarResidual,
        Command::Factorization,
        Command::FermionSvd,
        Command::Baselines,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyHermite => "verify-hermite",
            Command::Spectrum1d => "spectrum-1d",
            Command::VerifyAlgebra => "verify-algebra",
            Command::Constraint => "constraint",
            Command::Resonance => "resonance",
            Command::ScalarResidual => "scalar-residual",
            Command::Factorization => "factorization",
            Command::FermionSvd => "fermion-svd",
            Command::Baselines => "baselines",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Add informational rows for the alternative Gaussian exponent.
    pub literal_exponent: bool,
    /// Record wall time in the reports (breaks byte stability).
    pub timing: bool,
}

/// Runs a command. `all` yields one report per suite followed by the
/// combined report.
pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Vec<Report> {
    if cmd != Command::All {
        return vec![run_suite(cmd, cfg, opts)];
    }
    let start = std::time::Instant::now();
    let mut out: Vec<Report> = Command::SUITES
        .iter()
        .map(|&c| run_suite(c, cfg, opts))
        .collect();
    let mut all = Report::new("all", cfg.seed, cfg.echo());
    let mut suites = Vec::new();
    for r in &out {
        all.checks.extend(r.checks.iter().cloned().map(|mut c| {
            c.id = format!("{}/{}", r.command, c.id);
            c
        }));
        all.errors
            .extend(r.errors.iter().map(|e| format!("{}: {e}", r.command)));
        suites.push(obj([
            ("command", r.command.as_str().into()),
            ("checks", r.checks.len().into()),
            ("passed", r.passed().into()),
            ("exit_code", Node::Int(r.exit_code() as i64)),
        ]));
    }
    all.data.push(("suites".into(), Node::Arr(suites)));
    if opts.timing {
        all.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    out.push(all);
    out
}

pub fn run_suite(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Report {
    let start = std::time::Instant::now();
    let mut s = Suite {
        cfg,
        report: Report::new(cmd.name(), cfg.seed, cfg.echo()),
    };
    match cmd {
        Command::VerifyHermite => verify_hermite(&mut s, opts),
        Command::Spectrum1d => spectrum_1d(&mut s),
        Command::VerifyAlgebra => verify_algebra(&mut s),
        Command::Constraint => constraint(&mut s),
        Command::Resonance => resonance(&mut s),
        Command::ScalarResidual => scalar_residual(&mut s),
        Command::Factorization => factorization(&mut s),
        Command::FermionSvd => fermion(&mut s),
        Command::Baselines => baselines(&mut s),
        Command::All => unreachable!("handled by run"),
    }
    if opts.timing {
        s.report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    s.report
}

struct Suite<'a> {
    cfg: &'a RunConfig,
    report: Report,
}

impl Suite<'_> {
    fn push(&mut self, c: Check) {
        self.report.checks.push(c);
    }

    fn data(&mut self, key: &str, v: Node) {
        self.report.data.push((key.into(), v));
    }

    fn table(&mut self, t: Table) {
        self.report.tables.push(t);
    }

    fn guard(
        &mut self,
        id: &str,
        eq_ref: &'static str,
        f: impl FnOnce(&mut Self) -> Result<(), Error>,
    ) {
        if let Err(e) = f(self) {
            self.report.errors.push(format!("{id}: {e}"));
            self.push(Check::error(id, eq_ref, e.to_string()));
        }
    }
}

/// Independent deterministic stream per suite.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

fn factors() -> FactorMatrices<f64> {
    build_factor_matrices(&build_gammas())
}

fn max_abs_c(m: &nalgebra::DMatrix<discofield_core::C64>) -> f64 {
    m.iter().fold(0.0, |w, z| w.max(z.norm()))
}

const FOURIER_MAX_N: usize = 8;

fn verify_hermite(s: &mut Suite, opts: &RunOptions) {
    let cfg = s.cfg;
    let tol = cfg.tolerances.hermite;
    s.push(Check::at_most(
        "hermite-h3-at-one",
        "hermite-recurrence",
        (hermite_polynomial(3, 1.0_f64) + 4.0).abs(),
        tol,
    ));
    s.guard("ground-density", "harmonic-gaussian", |s| {
        let st = HermiteState::new(0, GaussianParams::new(0.0, 0.0, 0.5)?);
        let d = eval_phi(&st, 0.0)?.norm_sqr();
        s.push(Check::at_most(
            "ground-density-at-center",
            "harmonic-gaussian",
            (d - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs(),
            tol,
        ));
        Ok(())
    });
    s.guard("moments", "harmonic-gaussian-normalization", |s| {
        let fine = QuadratureSpec::default();
        let gh = GaussHermite::<f64>::new(cfg.hermite.quadrature_order)?;
        let mut rng = stream(cfg.seed, 1);
        let mut table = Table::new(
            "moments",
            &[
                "set", "n", "X", "P", "dp", "norm", "mean_x", "mean_p", "disp_x", "disp_p",
            ],
        );
        let mut w = [0.0_f64; 9];
        for set in 0..cfg.hermite.parameter_sets {
            let x0 = rng.random_range(-2.0..2.0);
            let p0 = rng.random_range(-2.0..2.0);
            let dp = 10f64.powf(rng.random_range(-1.0..1.0));
            let g = GaussianParams::new(x0, p0, dp)?;
            let states: Vec<_> = (0..=cfg.hermite.max_n)
                .map(|n| HermiteState::new(n, g))
                .collect();
            for st in &states {
                let n = st.n;
                let norm = inner_product_with(st, st, &gh)?.re;
                w[0] = w[0].max((norm - 1.0).abs());
                for other in &states[..n] {
                    w[1] = w[1].max(inner_product_with(other, st, &gh)?.norm());
                }
                let mx = moment_with(st, MomentKind::MeanX, &gh)?;
                let mp = moment_with(st, MomentKind::MeanP, &gh)?;
                let vx = moment_with(st, MomentKind::DispX, &gh)?;
                let vp = moment_with(st, MomentKind::DispP, &gh)?;
                let level = (2 * n + 1) as f64;
                let (wx, wp) = (level * g.dx() * g.dx(), level * dp * dp);
                w[2] = w[2].max((mx - x0).abs() / g.dx());
                w[3] = w[3].max((mp - p0).abs() / dp);
                w[4] = w[4].max((vx - wx).abs() / wx);
                w[5] = w[5].max((vp - wp).abs() / wp);
                w[6] = w[6].max(((vx * vp).sqrt() - level / 2.0).abs() / (level / 2.0));
                let ms = g.momentum_scale();
                let mut pnorm = 0.0;
                for (v, sw) in gh.nodes.iter().zip(&gh.scaled_weights) {
                    pnorm += sw * eval_phi_momentum(st, p0 + ms * v)?.norm_sqr() * ms;
                }
                w[7] = w[7].max((pnorm - 1.0).abs());
                if n <= FOURIER_MAX_N {
                    for j in 0..8 {
                        let p = p0 + dp * 0.8 * (j as f64 - 3.5);
                        let diff = fourier_by_quadrature(st, p, &fine)? - eval_phi_momentum(st, p)?;
                        w[8] = w[8].max(diff.norm() * ms.sqrt());
                    }
                }
                table.push(vec![
                    set.into(),
                    n.into(),
                    x0.into(),
                    p0.into(),
                    dp.into(),
                    norm.into(),
                    mx.into(),
                    mp.into(),
                    vx.into(),
                    vp.into(),
                ]);
            }
        }
        let rows: [(&str, &'static str); 9] = [
            ("normalization", "harmonic-gaussian-normalization"),
            ("orthogonality", "harmonic-gaussian-orthogonality"),
            ("mean-position", "mean-position"),
            ("mean-momentum", "mean-momentum"),
            ("position-dispersion", "position-dispersion"),
            ("momentum-dispersion", "momentum-dispersion"),
            ("uncertainty-product", "uncertainty-product"),
            ("momentum-normalization", "momentum-normalization"),
            ("fourier-closed-form", "harmonic-gaussian-fourier"),
        ];
        for ((id, eq), v) in rows.into_iter().zip(w) {
            s.push(Check::at_most(id, eq, v, tol));
        }
        s.table(table);
        Ok(())
    });
    if opts.literal_exponent {
        s.guard("exponent-literal", "exponent-variant", |s| {
            let g = GaussianParams::new(0.0, 0.0, 1.0)?;
            for n in 0..=4 {
                let m = variant_moments(
                    &HermiteState::new(n, g),
                    ExponentVariant::Literal,
                    &QuadratureSpec::default(),
                )?;
                s.push(Check::info(
                    format!("exponent-literal-norm-n{n}"),
                    "exponent-variant",
                    m.norm,
                ));
                s.push(Check::info(
                    format!("exponent-literal-dispersion-n{n}"),
                    "exponent-variant",
                    m.dispersion / (g.dx() * g.dx()),
                ));
            }
            Ok(())
        });
    }
}

const LADDER_WIDTHS: [f64; 3] = [0.5, 1.0, 2.0];
const GRID_LEVELS: usize = 6;

fn grid_errors(g: &GaussianParams<f64>, grid: &GridSpec, k: usize) -> Result<Vec<f64>, Error> {
    let pairs = eigensolve(&build_sigma_grid(g, grid)?, k)?;
    let dp2 = g.dp() * g.dp();
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(n, e)| (e.value - (2 * n + 1) as f64 * dp2) / ((2 * n + 1) as f64 * dp2))
        .collect())
}

fn spectrum_1d(s: &mut Suite) {
    let cfg = s.cfg;
    let t = cfg.tolerances.clone();
    let (x0, p0) = (cfg.x[0], cfg.p[0]);
    s.guard("ladder", "dispersion-spectrum", |s| {
        let basis = BasisSpec::new(cfg.cutoffs.one_d)?;
        let small = BasisSpec::new((cfg.cutoffs.one_d / 2).max(2))?;
        let idx: Vec<usize> = basis.interior().collect();
        let mut table = Table::new(
            "eigenvalues",
            &["representation", "dp", "n", "value", "exact"],
        );
        let mut w = [0.0_f64; 5];
        for dp in LADDER_WIDTHS {
            let g = GaussianParams::new(x0, p0, dp)?;
            let dp2 = dp * dp;
            let sigma = build_sigma_1d(&g, &basis);
            for n in basis.interior() {
                let exact = (2 * n + 1) as f64 * dp2;
                let v = sigma.matrix[(n, n)].re;
                w[0] = w[0].max((v - exact).abs() / dp2);
                table.push(vec![
                    "ladder".into(),
                    dp.into(),
                    n.into(),
                    v.into(),
                    exact.into(),
                ]);
            }
            w[1] = w[1].max(sigma.max_off_diagonal_on(&idx) / dp2);
            let (x, p) = build_xp_ladder(&g, &basis);
            w[2] = w[2].max(deviation_from_scaled_identity(
                &commutator(&x.matrix, &p.matrix),
                ci(),
                &idx,
            ));
            let p2 = build_p2_mean(&g, &basis);
            for n in basis.interior() {
                let exact = p0 * p0 + (2 * n + 1) as f64 * dp2;
                w[3] = w[3].max((p2.matrix[(n, n)].re - exact).abs() / (p0 * p0 + dp2));
            }
            let sigma_small = build_sigma_1d(&g, &small);
            for i in small.interior() {
                for j in small.interior() {
                    w[4] =
                        w[4].max((sigma_small.matrix[(i, j)] - sigma.matrix[(i, j)]).norm() / dp2);
                }
            }
        }
        s.push(Check::at_most(
            "ladder-spectrum",
            "dispersion-spectrum",
            w[0],
            t.spectrum_ladder,
        ));
        s.push(Check::at_most(
            "ladder-interior-offdiagonal",
            "dispersion-spectrum",
            w[1],
            t.spectrum_ladder,
        ));
        s.push(Check::at_most(
            "ladder-commutator",
            "canonical-commutator",
            w[2],
            t.commutator,
        ));
        s.push(Check::at_most(
            "p2-mean-spectrum",
            "momentum-quadratic-mean",
            w[3],
            t.spectrum_ladder,
        ));
        s.push(Check::at_most(
            "truncation-locality",
            "truncation-locality",
            w[4],
            t.spectrum_ladder,
        ));
        s.table(table);
        Ok(())
    });
    s.guard("grid-spectrum", "grid-dispersion", |s| {
        let grid = GridSpec::new(cfg.grid.half_width, cfg.grid.points)?;
        let mut worst = 0.0_f64;
        let mut gauge = 0.0_f64;
        for dp in LADDER_WIDTHS {
            let g = GaussianParams::new(x0, p0, dp)?;
            let errs = grid_errors(&g, &grid, GRID_LEVELS)?;
            worst = errs.iter().fold(worst, |a, e| a.max(e.abs()));
            let a = eigensolve(
                &build_sigma_grid(&g.with_means(x0, 0.0), &grid)?,
                GRID_LEVELS,
            )?;
            let b = eigensolve(
                &build_sigma_grid(&g.with_means(x0, 3.0 * dp), &grid)?,
                GRID_LEVELS,
            )?;
            for (u, v) in a.iter().zip(&b) {
                gauge = gauge.max((u.value - v.value).abs() / (dp * dp));
            }
        }
        s.push(Check::at_most(
            "grid-lowest-six",
            "grid-dispersion",
            worst,
            t.grid_relative,
        ));
        s.push(Check::at_most(
            "grid-gauge-invariance",
            "gauge-invariance",
            gauge,
            t.spectrum_ladder,
        ));
        Ok(())
    });
    s.guard("grid-convergence", "grid-convergence", |s| {
        let g = GaussianParams::new(x0, p0, 1.0)?;
        let mut table = Table::new("convergence", &["points", "spacing", "error_sum", "order"]);
        let mut prev: Option<(f64, f64)> = None;
        let mut orders = Vec::new();
        for &n in &cfg.grid.refinement {
            let grid = GridSpec::new(cfg.grid.half_width, n)?;
            let h = grid.spacing(&g);
            let e: f64 = grid_errors(&g, &grid, GRID_LEVELS)?
                .iter()
                .map(|v| v.abs())
                .sum();
            let order = prev.map_or(f64::NAN, |(hp, ep)| (ep / e).ln() / (hp / h).ln());
            if order.is_finite() {
                orders.push(order);
            }
            table.push(vec![n.into(), h.into(), e.into(), order.into()]);
            prev = Some((h, e));
        }
        let dev = orders.iter().fold(0.0_f64, |a, o| a.max((o - 2.0).abs()));
        s.push(Check::at_most(
            "grid-convergence-order",
            "grid-convergence",
            dev,
            t.convergence_order,
        ));
        s.data("convergence_orders", orders.into());
        s.table(table);
        Ok(())
    });
    s.guard("mass-sector", "mass-dispersion-spectrum", |s| {
        let params = *cfg.model().mass();
        let basis = BasisSpec::new(cfg.cutoffs.mass)?;
        let ops = build_mass_ops(&params, &basis);
        let idx: Vec<usize> = basis.interior().collect();
        let dm2 = params.dm() * params.dm();
        let m2 = params.mass() * params.mass();
        let spec = basis
            .interior()
            .map(|k| (ops.m2_mean.matrix[(k, k)].re - m2 - (2 * k + 1) as f64 * dm2).abs() / dm2)
            .fold(0.0_f64, f64::max);
        s.push(Check::at_most(
            "mass-spectrum",
            "mass-dispersion-spectrum",
            spec,
            t.mass_spectrum,
        ));
        s.push(Check::at_most(
            "mass-interior-offdiagonal",
            "mass-dispersion-spectrum",
            ops.m2_mean.max_off_diagonal_on(&idx) / dm2,
            t.mass_spectrum,
        ));
        s.push(Check::at_most(
            "mass-assembly-forms",
            "mass-dispersion-forms",
            assembly_form_difference(&params, &basis) / dm2.max(1.0),
            t.mass_forms,
        ));
        s.push(Check::at_most(
            "mass-commutator",
            "mass-commutator",
            mass_commutator_residual(&params, &basis),
            t.commutator,
        ));
        let grid = GridSpec::new(cfg.grid.half_width, cfg.grid.points)?;
        let pairs = eigensolve(&build_mass_dispersion_grid(&params, &grid)?, 5)?;
        let rel = pairs
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let want = (2 * k + 1) as f64 * dm2;
                ((e.value - want) / want).abs()
            })
            .fold(0.0_f64, f64::max);
        s.push(Check::at_most(
            "mass-grid-lowest-five",
            "mass-grid",
            rel,
            t.grid_relative,
        ));
        Ok(())
    });
}

fn verify_algebra(s: &mut Suite) {
    let tol = s.cfg.tolerances.clifford;
    let rows = relation_report(&factors());
    let mut table = Table::new(
        "relations",
        &["relation_id", "eq_ref", "max_abs_residual", "pass"],
    );
    for r in &rows {
        let c = Check::at_most(r.id, r.eq_ref, r.max_abs_residual, tol);
        table.push(vec![
            r.id.into(),
            r.eq_ref.into(),
            r.max_abs_residual.into(),
            c.pass.into(),
        ]);
        s.push(c);
    }
    s.table(table);
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn constraint(s: &mut Suite) {
    let cfg = s.cfg;
    let t = cfg.tolerances.clone();
    let f = factors();
    let mut rng = stream(cfg.seed, 4);
    let mut cases: Vec<([f64; 4], f64)> = Vec::new();
    if cfg.b_is_diagonal() {
        cases.push((std::array::from_fn(|mu| cfg.b[mu][mu]), cfg.dm * cfg.dm));
    }
    for _ in 0..5 {
        cases.push((
            std::array::from_fn(|_| rng.random_range(0.1..5.0)),
            rng.random_range(0.1..3.0),
        ));
    }
    let worst = cases
        .iter()
        .map(|(d, dm2)| {
            let r = constraint_residual(&f, &Matrix4::from_diagonal(&(*d).into()), *dm2);
            let want = diagonal_constraint_norm_sq(*d, *dm2);
            (r.frobenius * r.frobenius - want).abs() / want
        })
        .fold(0.0_f64, f64::max);
    s.push(Check::at_most(
        "constraint-norm-formula",
        "factor-constraint",
        worst,
        t.constraint_relative,
    ));

    let mut lin = 0.0_f64;
    for _ in 0..5 {
        let (b1, b2) = (random_symmetric(&mut rng), random_symmetric(&mut rng));
        let (d1, d2, c) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-2.0..2.0),
        );
        let lhs = constraint_matrix(&f, &(b1 + b2 * c), d1 + c * d2);
        let rhs = constraint_matrix(&f, &b1, d1)
            + constraint_matrix(&f, &b2, d2) * discofield_core::C64::new(c, 0.0);
        lin = lin.max(max_abs_c(&(&lhs - &rhs)) / max_abs_c(&rhs).max(1.0));
    }
    s.push(Check::at_most(
        "constraint-linearity",
        "factor-constraint",
        lin,
        t.constraint_relative,
    ));

    let own = constraint_residual(&f, &Matrix4::from_fn(|i, j| cfg.b[i][j]), cfg.dm * cfg.dm);
    s.push(Check::info(
        "constraint-config-frobenius",
        "factor-constraint",
        own.frobenius,
    ));
    s.push(Check::info(
        "constraint-config-max-abs",
        "factor-constraint",
        own.max_abs,
    ));

    let sol = constraint_solve(&f);
    let gram = constraint_gram_smallest(&f);
    s.push(Check::info(
        "constraint-smallest-singular-value",
        "factor-constraint",
        sol.smallest(),
    ));
    s.push(Check::at_most(
        "constraint-singular-value-accuracy",
        "factor-constraint",
        (sol.smallest() - gram).abs(),
        t.constraint_accuracy,
    ));
    s.push(Check::at_most(
        "constraint-minimizer-residual",
        "factor-constraint",
        (sol.residual - sol.smallest()).abs(),
        t.constraint_accuracy,
    ));
    let labels = constraint_parameter_labels();
    s.data(
        "minimizer",
        obj(labels
            .iter()
            .cloned()
            .zip(sol.minimizer.iter().map(|&v| Node::from(v)))),
    );
    s.data("singular_values", sol.singular_values.clone().into());
    let mut table = Table::new("singular_values", &["index", "value"]);
    for (i, v) in sol.singular_values.iter().enumerate() {
        table.push(vec![i.into(), (*v).into()]);
    }
    s.table(table);
}

fn resonance(s: &mut Suite) {
    let cfg = s.cfg;
    let t = cfg.tolerances.clone();
    let model = cfg.model();
    let cap = cfg.cutoffs.dimension_cap;
    let scale = (0..4).map(|mu| cfg.b[mu][mu]).sum::<f64>();
    s.guard("tensor-spectrum", "contracted-dispersion-spectrum", |s| {
        let basis = ProductBasisSpec::new(cfg.cutoffs.tensor, cap)?;
        let op = contract_metric_sigma(model.b(), model.means(), &basis)?;
        s.push(Check::at_most(
            "tensor-hermiticity",
            "tensor-dispersion",
            op.hermiticity_residual(),
            t.hermiticity,
        ));
        let idx: Vec<usize> = basis
            .interior_mask()
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(i, _)| i)
            .collect();
        let sub = OperatorMatrix::new(op.compress(&idx), "interior");
        let got = eigensolve(&sub, idx.len())?;
        let mut want = idx
            .iter()
            .map(|&i| {
                let n = multi_index(&basis.cutoffs(), i);
                contracted_eigenvalue(model.b(), [n[0], n[1], n[2], n[3]])
            })
            .collect::<Result<Vec<f64>, _>>()?;
        want.sort_by(f64::total_cmp);
        let err = got
            .iter()
            .zip(&want)
            .fold(0.0_f64, |a, (g, w)| a.max((g.value - w).abs()))
            / scale;
        s.push(Check::at_most(
            "tensor-interior-spectrum",
            "contracted-dispersion-spectrum",
            err,
            t.tensor_spectrum,
        ));
        let mut sym = 0.0_f64;
        for mu in 0..4 {
            for nu in mu + 1..4 {
                let a = build_sigma_tensor(mu, nu, model.b(), model.means(), &basis)?;
                let b = build_sigma_tensor(nu, mu, model.b(), model.means(), &basis)?;
                sym = sym.max(max_abs_c(&(&a.matrix - &b.matrix)));
            }
        }
        s.push(Check::at_most(
            "tensor-symmetry",
            "tensor-symmetry",
            sym,
            t.hermiticity,
        ));
        Ok(())
    });
    s.guard("tensor-commutators", "tensor-commutators", |s| {
        let basis = ProductBasisSpec::new(cfg.cutoffs.tensor, cap)?;
        let rows = commutation_check(&basis, std::array::from_fn(|mu| basis_width(cfg.b[mu][mu])));
        let mut table = Table::new("commutators", &["commutator", "residual"]);
        for (kind, id) in [
            (
                CommutatorKind::MomentumPosition,
                "commutator-momentum-position",
            ),
            (
                CommutatorKind::MomentumMomentum,
                "commutator-momentum-momentum",
            ),
            (
                CommutatorKind::PositionPosition,
                "commutator-position-position",
            ),
        ] {
            let w = rows
                .iter()
                .filter(|r| r.kind == kind)
                .fold(0.0_f64, |a, r| a.max(r.residual));
            s.push(Check::at_most(id, "tensor-commutators", w, t.commutator));
        }
        for r in &rows {
            table.push(vec![r.label().into(), r.residual.into()]);
        }
        s.table(table);
        Ok(())
    });
    s.guard("resonance-enumeration", "resonance", |s| {
        let tuples = resonance_enumerate(model, cfg.max_n)?;
        s.push(Check::info(
            "resonance-count",
            "resonance",
            tuples.len() as f64,
        ));
        let worst = tuples.iter().fold(0.0_f64, |a, q| a.max(q.residual));
        s.push(Check::at_most(
            "resonance-max-mismatch",
            "resonance",
            worst,
            t.resonance * scale.max(1.0),
        ));
        let oracle = brute_force_resonances(cfg);
        let listed: Vec<[usize; 5]> = tuples.iter().map(QuantumTuple::indices).collect();
        s.push(Check::flag(
            "resonance-matches-brute-force",
            "resonance",
            listed == oracle,
        ));
        s.push(Check::info(
            "resonance-contains-ground",
            "resonance",
            if listed.contains(&[0; 5]) { 1.0 } else { 0.0 },
        ));
        let mut table = Table::new("tuples", &["n0", "n1", "n2", "n3", "k", "residual"]);
        for q in &tuples {
            let i = q.indices();
            table.push(vec![
                i[0].into(),
                i[1].into(),
                i[2].into(),
                i[3].into(),
                i[4].into(),
                q.residual.into(),
            ]);
        }
        s.table(table);
        Ok(())
    });
    s.guard("scalar-nullspace", "scalar-operator-nullspace", |s| {
        let op = assemble_scalar_operator(&model.model(), cfg.cutoffs.scalar, cap)?;
        s.push(Check::at_most(
            "scalar-operator-hermiticity",
            "scalar-operator-nullspace",
            op.hermiticity_residual(),
            t.hermiticity,
        ));
        let spec = op.interior_spectrum(t.nullspace)?;
        let reach = cfg.cutoffs.scalar[..4]
            .iter()
            .max()
            .copied()
            .unwrap_or(2)
            .saturating_sub(3);
        let basis = FieldBasis::new(cfg.cutoffs.scalar, cap, 1)?;
        let expected = resonance_enumerate(model, reach)?
            .iter()
            .filter(|q| basis.contains_interior(q.indices()))
            .count();
        s.push(Check::count_equal(
            "scalar-nullspace-count",
            "scalar-operator-nullspace",
            spec.nullspace,
            expected,
        ));
        let gap = spec
            .eigenvalues
            .iter()
            .map(|v| v.abs())
            .filter(|v| *v > t.nullspace)
            .fold(f64::INFINITY, f64::min);
        s.push(Check::info(
            "scalar-interior-spectral-gap",
            "scalar-operator-nullspace",
            gap,
        ));
        Ok(())
    });
}

/// Every `(n, k)` with `n_mu <= max_n` and `k` up to the largest level the
/// tensor eigenvalue can reach, matched by direct comparison.
fn brute_force_resonances(cfg: &RunConfig) -> Vec<[usize; 5]> {
    let d: [f64; 4] = std::array::from_fn(|mu| cfg.b[mu][mu]);
    let dm2 = cfg.dm * cfg.dm;
    let r = cfg.max_n + 1;
    let mut out = Vec::new();
    for flat in 0..r.pow(4) {
        let n = multi_index(&[r; 4], flat);
        let lhs = (2 * n[0] + 1) as f64 * d[0]
            - (1..4).map(|j| (2 * n[j] + 1) as f64 * d[j]).sum::<f64>();
        let kmax = (lhs / dm2).max(0.0).ceil() as usize;
        for k in 0..=kmax {
            if (lhs - (2 * k + 1) as f64 * dm2).abs() <= 1e-12 * lhs.abs().max(1.0) {
                out.push([n[0], n[1], n[2], n[3], k]);
            }
        }
    }
    out
}

const TRANSLATION: [f64; 5] = [0.37, -0.21, 0.13, 0.29, -0.41];

fn scalar_residual(s: &mut Suite) {
    let cfg = s.cfg;
    let t = cfg.tolerances.clone();
    let model = cfg.model();
    s.guard("scalar-residual", "scalar-field-equation", |s| {
        let tuples = resonance_enumerate(model, cfg.max_n)?;
        let points = model.model().sample_points(cfg.seed, cfg.sample_points);
        let mut table = Table::new(
            "tuples",
            &[
                "n0",
                "n1",
                "n2",
                "n3",
                "k",
                "normalized",
                "max_lhs",
                "max_field",
            ],
        );
        let mut worst = 0.0_f64;
        let mut degenerate = false;
        for q in &tuples {
            let r = scalar_residual_pointwise(&ScalarSolution::new(*q, model), &points)?;
            worst = worst.max(r.normalized);
            degenerate |= r.degenerate;
            let i = q.indices();
            table.push(vec![
                i[0].into(),
                i[1].into(),
                i[2].into(),
                i[3].into(),
                i[4].into(),
                r.normalized.into(),
                r.max_lhs.into(),
                r.max_field.into(),
            ]);
        }
        s.push(Check::info(
            "scalar-resonant-tuples",
            "scalar-field-equation",
            tuples.len() as f64,
        ));
        s.push(Check::info(
            "scalar-sample-points",
            "scalar-field-equation",
            points.len() as f64,
        ));
        if !tuples.is_empty() {
            s.push(Check::at_most(
                "scalar-residual-max",
                "scalar-field-equation",
                worst,
                t.scalar_residual,
            ));
            s.push(Check::flag(
                "scalar-field-nonvanishing",
                "scalar-field-equation",
                !degenerate,
            ));
        }
        s.table(table);

        let scale = model.model().residual_scale();
        let k = (0..64)
            .find(|&k| {
                tuple_mismatch(model, [0, 0, 0, 0, k])
                    .map(|m| m.abs() > 1e-6 * scale)
                    .unwrap_or(false)
            })
            .ok_or_else(|| Error::NotEvaluable("no non-resonant control tuple".into()))?;
        let control = QuantumTuple {
            n: [0; 4],
            k,
            resonant: false,
            residual: tuple_mismatch(model, [0, 0, 0, 0, k])?.abs(),
        };
        let r = scalar_residual_pointwise(&ScalarSolution::new(control, model), &points)?;
        s.push(Check::at_least(
            "scalar-nonresonant-control",
            "scalar-field-equation",
            r.normalized,
            1e-3,
        ));

        let probe = tuples.first().copied().unwrap_or(control);
        let shifted_cfg = model.shifted(TRANSLATION)?;
        let a = ScalarSolution::new(probe, model);
        let b = ScalarSolution::new(probe, &shifted_cfg);
        let moved: Vec<[f64; 5]> = points
            .iter()
            .map(|p| std::array::from_fn(|i| p[i] + TRANSLATION[i]))
            .collect();
        let mut diff = 0.0_f64;
        let mut peak = 0.0_f64;
        for (p, q) in points.iter().zip(&moved) {
            let (u, v) = (a.eval(p)?.norm(), b.eval(q)?.norm());
            diff = diff.max((u - v).abs());
            peak = peak.max(u);
        }
        let ra = scalar_residual_pointwise(&a, &points)?.normalized;
        let rb = scalar_residual_pointwise(&b, &moved)?.normalized;
        s.push(Check::at_most(
            "scalar-translation-covariance",
            "scalar-field-equation",
            (diff / peak.max(f64::MIN_POSITIVE)).max((ra - rb).abs()),
            t.translation,
        ));
        s.push(Check::flag(
            "scalar-arity-enforced",
            "scalar-field-equation",
            matches!(a.eval(&[0.0; 4]), Err(Error::WrongArity(4))),
        ));
        Ok(())
    });
}

fn random_model(rng: &mut ChaCha8Rng) -> FieldModel<f64> {
    let l = Matrix4::from_fn(|_, _| rng.random_range(-0.5..0.5));
    let d: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.2..2.0));
    let b = l * l.transpose() + Matrix4::from_diagonal(&d.into());
    FieldModel {
        b: (b + b.transpose()) * 0.5,
        dm2: rng.random_range(0.2..2.0),
        means: FourMeans::new(
            std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
            std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        ),
        mass_mean: rng.random_range(0.5..2.0),
        tau_mean: rng.random_range(-1.0..1.0),
    }
}

pub const RANDOM_FACTORIZATION_CONFIGS: usize = 5;

fn factorization(s: &mut Suite) {
    let cfg = s.cfg;
    let tol = cfg.tolerances.factorization;
    let cap = cfg.cutoffs.dimension_cap;
    let cut = cfg.cutoffs.fermion;
    let f = factors();
    let mut rng = stream(cfg.seed, 7);
    let mut models = vec![("config".to_string(), cfg.model().model())];
    for i in 0..RANDOM_FACTORIZATION_CONFIGS {
        models.push((format!("random-{i}"), random_model(&mut rng)));
    }
    let mut table = Table::new(
        "configs",
        &[
            "config",
            "B00",
            "B11",
            "B22",
            "B33",
            "B01",
            "dm2",
            "blocks",
            "block_spread",
            "off_block_max",
            "constant_deviation",
        ],
    );
    for (label, m) in &models {
        let id = format!("factorization-{label}");
        s.guard(&id, "operator-factorization", |s| {
            let r = factorization_product_check(m, &f, cut, cap)?;
            let v = r
                .block_spread
                .max(r.off_block_max)
                .max(r.constant_deviation);
            let mut c = Check::at_most(id.as_str(), "operator-factorization", v, tol);
            c.pass &= r.blocks > 0;
            s.push(c.with_note(format!("{} interior blocks", r.blocks)));
            table.push(vec![
                label.as_str().into(),
                m.b[(0, 0)].into(),
                m.b[(1, 1)].into(),
                m.b[(2, 2)].into(),
                m.b[(3, 3)].into(),
                m.b[(0, 1)].into(),
                m.dm2.into(),
                r.blocks.into(),
                r.block_spread.into(),
                r.off_block_max.into(),
                r.constant_deviation.into(),
            ]);
            Ok(())
        });
    }
    s.guard("factorization-free-exact", "operator-factorization", |s| {
        let mut m = cfg.model().model();
        m.b = Matrix4::zeros();
        m.dm2 = 0.0;
        let r = factorization_product_check(&m, &f, cut, cap)?;
        s.push(Check::at_most(
            "factorization-free-exact",
            "operator-factorization",
            r.full_max_abs,
            tol,
        ));
        Ok(())
    });
    s.table(table);
}

const SINGULAR_TABLE_ROWS: usize = 128;

fn fermion(s: &mut Suite) {
    let cfg = s.cfg;
    let t = cfg.tolerances.clone();
    let cap = cfg.cutoffs.dimension_cap;
    let cut = cfg.cutoffs.fermion;
    s.guard("fermion-svd", "fermion-field-equation", |s| {
        let m = cfg.model().model();
        let f = factors();
        let op = assemble_fermion_operator(&m, &f, cut, cap)?;
        s.push(Check::count_equal(
            "fermion-sparsity",
            "fermion-operator",
            op.sparsity_violations(),
            0,
        ));
        s.push(Check::info(
            "fermion-hermiticity-defect",
            "fermion-operator",
            op.hermiticity_defect(),
        ));
        let svd = fermion_svd(&m, &f, cut, cap, t.fermion_degeneracy)?;
        s.push(Check::flag(
            "fermion-dense-svd-complete",
            "fermion-operator",
            svd.singular_values.len() == svd.dim,
        ));
        s.push(Check::info(
            "fermion-dimension",
            "fermion-operator",
            svd.dim as f64,
        ));
        s.push(Check::info(
            "fermion-smallest-singular-value",
            "fermion-operator",
            svd.smallest(),
        ));
        s.push(Check::info(
            "fermion-smallest-multiplicity",
            "fermion-operator",
            svd.multiplicity as f64,
        ));
        if let Some(&next) = svd.singular_values.get(svd.multiplicity) {
            s.push(Check::info(
                "fermion-next-singular-value",
                "fermion-operator",
                next,
            ));
        }
        s.push(Check::info(
            "fermion-exact-kernel-dimension",
            "fermion-field-equation",
            svd.exact_kernel as f64,
        ));
        s.push(Check::info(
            "fermion-candidate-leakage",
            "fermion-field-equation",
            svd.leakage,
        ));

        let scale = m.residual_scale();
        let points = m.sample_points(cfg.seed, cfg.sample_points);
        let cand = SpinorCandidate::new(cut, svd.candidate.clone())?;
        let pw = fermion_residual_pointwise(&cand, &m, &f, &points)?;
        let basis = svd.smallest() / scale;
        let mut c = Check::at_most(
            "fermion-residual-consistency",
            "fermion-field-equation",
            pw.normalized,
            t.fermion_factor * basis + t.fermion_floor,
        );
        c.pass = residuals_consistent(pw.normalized, basis, t.fermion_factor, t.fermion_floor)
            && !pw.degenerate;
        s.push(c.with_note(format!("singular value / scale = {basis:.6e}")));

        let phased = SpinorCandidate::new(cut, &svd.candidate * cis(0.7))?;
        let pr = fermion_residual_pointwise(&phased, &m, &f, &points)?;
        s.push(Check::at_most(
            "fermion-phase-invariance",
            "fermion-field-equation",
            (pr.normalized - pw.normalized).abs(),
            t.fermion_floor,
        ));
        let zero = fermion_residual_pointwise(&SpinorCandidate::zero(cut), &m, &f, &points)?;
        s.push(Check::flag(
            "fermion-zero-candidate-degenerate",
            "fermion-field-equation",
            zero.degenerate,
        ));

        let mut table = Table::new("singular_values", &["index", "value"]);
        for (i, v) in svd
            .singular_values
            .iter()
            .take(SINGULAR_TABLE_ROWS)
            .enumerate()
        {
            table.push(vec![i.into(), (*v).into()]);
        }
        s.table(table);
        Ok(())
    });
}

pub const BASELINE_MOMENTA: usize = 20;

fn baselines(s: &mut Suite) {
    let cfg = s.cfg;
    let t = cfg.tolerances.clone();
    let g = build_gammas::<f64>();
    let mut rng = stream(cfg.seed, 9);
    s.push(Check::at_most(
        "gamma-clifford",
        "gamma-clifford",
        g.clifford_residual(),
        t.clifford,
    ));
    s.push(Check::at_most(
        "gamma-five",
        "gamma-five",
        g.gamma5_residual(),
        t.clifford,
    ));
    let mut rep = 0.0_f64;
    for _ in 0..3 {
        let u = unitary_from::<f64>(4, || rng.random_range(-1.0..1.0));
        let gc = g.conjugated(&u);
        rep = rep.max(gc.clifford_residual()).max(gc.gamma5_residual());
        let fc = build_factor_matrices(&gc);
        rep = relation_report(&fc)
            .iter()
            .fold(rep, |a, r| a.max(r.max_abs_residual));
    }
    s.push(Check::at_most(
        "representation-independence",
        "representation-independence",
        rep,
        t.hermiticity,
    ));

    s.guard("plane-waves", "klein-gordon-baseline", |s| {
        let mut table = Table::new(
            "momenta",
            &[
                "m",
                "p0",
                "p1",
                "p2",
                "p3",
                "offset",
                "kg_on",
                "dirac_on",
                "kg_off",
                "dirac_off",
            ],
        );
        let mut w = [0.0_f64; 3];
        let mut off = [f64::INFINITY; 2];
        for _ in 0..BASELINE_MOMENTA {
            let m = rng.random_range(0.5..2.0);
            let p3: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            let delta = rng.random_range(0.1..1.0);
            let p = on_shell(m, p3)?;
            let q = [p[0] + delta, p[1], p[2], p[3]];
            let kg_on = kg_baseline_residual(&p, m);
            let d_on = dirac_baseline_residual(&g, &p, m);
            let kg_off = kg_baseline_residual(&q, m);
            let d_off = dirac_baseline_residual(&g, &q, m);
            w[0] = w[0].max(kg_on);
            w[1] = w[1].max(d_on.smallest_singular_value);
            w[2] = w[2]
                .max(d_on.factorization_residual)
                .max(d_off.factorization_residual);
            off[0] = off[0].min(kg_off);
            off[1] = off[1].min(d_off.smallest_singular_value);
            table.push(vec![
                m.into(),
                p[0].into(),
                p[1].into(),
                p[2].into(),
                p[3].into(),
                delta.into(),
                kg_on.into(),
                d_on.smallest_singular_value.into(),
                kg_off.into(),
                d_off.smallest_singular_value.into(),
            ]);
        }
        s.push(Check::at_most(
            "klein-gordon-on-shell",
            "klein-gordon-baseline",
            w[0],
            t.baseline,
        ));
        s.push(Check::at_most(
            "dirac-on-shell",
            "dirac-baseline",
            w[1],
            t.baseline,
        ));
        s.push(Check::at_most(
            "dirac-factorization",
            "dirac-factorization",
            w[2],
            t.baseline,
        ));
        s.push(Check::at_least(
            "klein-gordon-off-shell",
            "klein-gordon-baseline",
            off[0],
            t.off_shell_floor,
        ));
        s.push(Check::at_least(
            "dirac-off-shell",
            "dirac-baseline",
            off[1],
            t.off_shell_floor,
        ));
        s.table(table);
        Ok(())
    });
    s.push(Check::at_most(
        "config-mass-shell",
        "mass-shell",
        kg_baseline_residual(&cfg.p, cfg.mass),
        t.baseline.max(discofield_core::field::MASS_SHELL_TOL),
    ));
}
