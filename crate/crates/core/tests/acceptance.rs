//! Acceptance suite. Runs every criterion in sequence, prints one line per
//! criterion and fails if any of them fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{
    c, folded, folding_sign, jacobi_trudi, random_block, random_matrix, random_pair, rng, szego_pair,
};
use rand::Rng;
use widom_tau::fredholm::{assemble_l, bo_gap, minor_z, plucker_minor, series_tau, tau_determinant, Sign};
use widom_tau::linalg::{identity, max_abs, solve, CMat, C64};
use widom_tau::parametrix::{gd_jump, pvi_jump, schur_modes, schur_polynomials, FuchsianSpec, GDSpec};
use widom_tau::plemelj::kernel_modes_with_tol;
use widom_tau::{
    assemble_jump_form_l, assemble_multicircle_l, build_contour, enumerate_configurations, kernel_modes,
    tau_multicircle, widom_derivative, widom_sequence, Circle, FactorizationPair, JumpAssignment, LoopConfig,
    MatrixLoop, ModeBlock, Result,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn ln_tau(f: &FactorizationPair, q: f64) -> Result<C64> {
    Ok(tau_determinant(&kernel_modes(f, q)?)?.value.ln())
}

/// Central difference with one Richardson step.
fn richardson<F: Fn(f64) -> Result<C64>>(f: F, t: f64, h: f64) -> Result<C64> {
    let d = |h: f64| -> Result<C64> { Ok((f(t + h)? - f(t - h)?) / c(2.0 * h, 0.0)) };
    let (coarse, fine) = (d(h)?, d(h / 2.0)?);
    Ok((fine * 4.0 - coarse) / 3.0)
}

fn strong_szego() -> Result<Outcome> {
    let t = 0.5;
    let f = szego_pair(t, 48);
    let tau = tau_determinant(&kernel_modes(&f, 24.0)?)?.value;
    let cfg = LoopConfig::with_window(48);
    let log_a = MatrixLoop::from_samples(|z| CMat::from_element(1, 1, c(t, 0.0) * (z + z.inv())), 1, Circle::unit(), &cfg)?;
    let sum: C64 = (1..=48).map(|k| log_a.mode(k)[(0, 0)] * log_a.mode(-k)[(0, 0)] * k as f64).sum();
    let oracle = sum.exp();
    let seq = widom_sequence(&f.jump()?, 64, false)?;
    let e_tau = (tau - oracle).norm();
    let e_seq = (seq.last() - tau).norm();
    let e_sum = (sum - c(t * t, 0.0)).norm();
    outcome(
        e_tau < 1e-8 && e_seq < 1e-8 && e_sum < 1e-14,
        format!("|tau - e^(t^2)| = {e_tau:.2e}, |G^-64 det T_64 - tau| = {e_seq:.2e}, oracle sum error {e_sum:.1e}"),
    )
}

fn block_widom() -> Result<Outcome> {
    let mut r = rng(34);
    let f = random_pair(&mut r, 2, Circle::unit(), 64, 0.3);
    let tau = tau_determinant(&kernel_modes(&f, 48.0)?)?.value;
    let seq = widom_sequence(&f.jump()?, 48, false)?;
    let err = (seq.last() - tau).norm();
    let ratio = seq.ratio.unwrap_or(f64::NAN);
    outcome(err < 1e-6 && ratio < 0.9, format!("|G^-48 det T_48 - tau| = {err:.2e}, fitted ratio {ratio:.3}"))
}

fn scaled_block(m: &ModeBlock, s: f64) -> ModeBlock {
    let k = c(s, 0.0);
    ModeBlock::from_fn(m.size(), m.count(), |i, j| m.a(i, j) * k, |i, j| m.d(i, j) * k)
}

fn series_vs_determinant() -> Result<Outcome> {
    let mut r = rng(300);
    let mut worst = 0.0f64;
    let mut worst_norm = 0.0f64;
    for k in 0..20 {
        let n = 1 + k % 3;
        let raw = random_block(&mut r, n, 6, 0.3);
        let l = assemble_l(&raw);
        let half = n * 6;
        let a = l.view((0, half), (half, half)).norm();
        let d = l.view((half, 0), (half, half)).norm();
        // Frobenius norm bounds the operator norm
        let m = scaled_block(&raw, (0.3 / a.max(d)).min(1.0));
        let l = assemble_l(&m);
        worst_norm = worst_norm.max(l.view((0, half), (half, half)).norm()).max(l.view((half, 0), (half, half)).norm());
        let det = tau_determinant(&m)?.value;
        let series = series_tau(&m, 10)?.value;
        worst = worst.max((det - series).norm());
    }
    outcome(
        worst < 1e-9 && worst_norm <= 0.3 + 1e-12,
        format!("max |series(W=10) - det| = {worst:.2e} over 20 blocks, max norm {worst_norm:.3}"),
    )
}

fn borodin_okounkov() -> Result<Outcome> {
    let f = szego_pair(0.5, 48);
    let j = f.jump()?;
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let (l, r) = bo_gap(&j, &f, n, 24.0)?;
        worst = worst.max((l - r).norm());
    }
    outcome(worst < 1e-8, format!("max |lhs - rhs| = {worst:.2e} for n = 1..6"))
}

fn differentiation() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for t in [0.2, 0.5] {
        let wd = widom_derivative(|s| Ok(szego_pair(s, 32)), t, 24, 1e-4)?;
        let fd = richardson(|s| ln_tau(&szego_pair(s, 32), 24.0), t, 1e-4)?;
        worst = worst.max((wd - fd).norm() / fd.norm());
    }
    let mut r = rng(35);
    let base = random_pair(&mut r, 2, Circle::unit(), 48, 0.25);
    let dir_p = random_matrix(&mut r, 2, 0.2);
    let dir_m = random_matrix(&mut r, 2, 0.2);
    let family = |t: f64| {
        let p = base.psi_plus().map_modes(|k, m| if k == 1 { m + &dir_p * c(t, 0.0) } else { m.clone() });
        let q = base.psi_minus().map_modes(|k, m| if k == -1 { m + &dir_m * c(t, 0.0) } else { m.clone() });
        FactorizationPair::new(p, q)
    };
    let t0 = 0.3;
    let wd = widom_derivative(family, t0, 40, 1e-4)?;
    let fd = richardson(|s| ln_tau(&family(s)?, 40.0), t0, 1e-4)?;
    let generic = (wd - fd).norm() / fd.norm();
    outcome(
        worst < 1e-6 && generic < 1e-6,
        format!("relative error Szego {worst:.2e}, random family {generic:.2e}"),
    )
}

fn plucker() -> Result<Outcome> {
    let mut r = rng(600);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..10 {
        let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.3);
        let m = kernel_modes_with_tol(&f, 6.0, 1.0)?;
        for cfg in enumerate_configurations(2, 4) {
            for sign in [Sign::Plus, Sign::Minus] {
                let g = plucker_minor(&f, &cfg, sign, 6.0)?;
                let z = minor_z(&m, &cfg, sign)?;
                worst = worst.max((g - z).norm());
                checked += 1;
            }
        }
    }
    outcome(worst < 1e-9, format!("max |G - Z| = {worst:.2e} over {checked} minors"))
}

fn pvi_spec() -> FuchsianSpec {
    FuchsianSpec {
        theta0: c(0.17, 0.0),
        theta_t: c(0.23, 0.0),
        theta1: c(0.13, 0.0),
        theta_inf: c(0.29, 0.0),
        sigma: c(0.21, 0.0),
        kappa_plus: c(0.6, 0.0),
        kappa_minus: c(0.9, 0.0),
        t: 0.1,
    }
}

fn pvi_ln_tau(t: f64, radius: f64) -> Result<C64> {
    let pair = pvi_jump(&pvi_spec().at(t), Some(radius), &LoopConfig::with_window(192))?;
    ln_tau(&pair, 72.0)
}

/// First three derivatives of `ln tau` at `t` from a 13-point interpolant of
/// half-width `t / 4`, on a fixed circle.
fn ln_tau_derivatives(t: f64) -> Result<[C64; 3]> {
    let half = 0.25 * t;
    let pts = 13;
    let mut v = CMat::zeros(pts, pts);
    let mut rhs = CMat::zeros(pts, 1);
    for i in 0..pts {
        let u = (i as f64 - 6.0) / 6.0;
        for k in 0..pts {
            v[(i, k)] = c(u.powi(k as i32), 0.0);
        }
        rhs[(i, 0)] = pvi_ln_tau(t + half * u, t.sqrt())?;
    }
    let coef = solve(&v, &rhs).expect("Vandermonde system is regular");
    Ok([coef[(1, 0)] / half, coef[(2, 0)] * 2.0 / (half * half), coef[(3, 0)] * 6.0 / half.powi(3)])
}

/// `(t(t-1) z'')^2 + 2 det M` for the sigma form of Painleve VI.
fn sigma_residual(t: f64, z: C64, z1: C64, z2: C64, th: [C64; 4]) -> C64 {
    let [t0, tt, t1, ti] = th.map(|x| x * x);
    let e = z1 + t0 + tt + t1 - ti;
    let m = CMat::from_row_slice(
        3,
        3,
        &[
            t0 * 2.0,
            z1 * t - z,
            e,
            z1 * t - z,
            tt * 2.0,
            z1 * (t - 1.0) - z,
            e,
            z1 * (t - 1.0) - z,
            t1 * 2.0,
        ],
    );
    let lhs = z2 * (t * (t - 1.0));
    lhs * lhs + m.determinant() * 2.0
}

fn painleve_vi() -> Result<Outcome> {
    let mut devs = Vec::new();
    for t in [0.2, 0.1, 0.05, 0.025] {
        devs.push((pvi_ln_tau(t, t.sqrt())?.exp() - 1.0).norm());
    }
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    let spec = pvi_spec();
    let th = [spec.theta0, spec.theta_t, spec.theta1, spec.theta_inf];
    let e = spec.jmu_exponent();
    let mut worst = 0.0f64;
    let mut control = f64::INFINITY;
    let mut scale = 0.0f64;
    for k in 0..=10 {
        let t = 0.05 + 0.025 * k as f64;
        let [f1, f2, f3] = ln_tau_derivatives(t)?;
        let zeta = |e: C64| -> [C64; 3] {
            let (g1, g2, g3) = (f1 + e / t, f2 - e / (t * t), f3 + e * 2.0 / (t * t * t));
            let p = t * (t - 1.0);
            [g1 * p, g1 * (2.0 * t - 1.0) + g2 * p, g1 * 2.0 + g2 * (2.0 * (2.0 * t - 1.0)) + g3 * p]
        };
        let [z, z1, z2] = zeta(e);
        worst = worst.max(sigma_residual(t, z, z1, z2, th).norm());
        scale = scale.max((z2 * (t * (t - 1.0))).norm().powi(2));
        // negative control: the bare determinant without the prefactor
        let [z, z1, z2] = zeta(c(0.0, 0.0));
        control = control.min(sigma_residual(t, z, z1, z2, th).norm());
    }
    outcome(
        monotone && worst < 1e-5 && control > 100.0 * worst,
        format!(
            "|tau - 1| = {:.2e} > {:.2e} > {:.2e} > {:.2e}; sigma-PVI residual {worst:.2e} on [0.05, 0.3] \
             ((t(t-1)z'')^2 up to {scale:.1e}); without prefactor {control:.2e}",
            devs[0], devs[1], devs[2], devs[3]
        ),
    )
}

fn nilpotent_gd(x: C64, t1: C64, t3: C64) -> GDSpec {
    let mut spec = GDSpec::new(2);
    spec.times = BTreeMap::from([(1, t1), (3, t3)]);
    spec.x = x;
    spec.window = 48;
    let n = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
    spec.x_modes = vec![(-1, n)];
    spec.polynomial = true;
    spec
}

fn partitions_up_to(n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(prefix.clone());
        for part in 1..=max.min(left) {
            prefix.push(part);
            rec(left - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// `sum_Y Z+(Y) Z-(Y)` with `Z+` a signed Schur polynomial and `Z-` the
/// Plucker coordinate of the minus frame.
fn brute_force_gd(spec: &GDSpec, parts: &[Vec<usize>]) -> Result<C64> {
    let pair = gd_jump(spec)?;
    let mut eff = spec.times.clone();
    *eff.entry(1).or_insert(c(0.0, 0.0)) += spec.x;
    let s = schur_polynomials(&eff, 24);
    let mut total = c(0.0, 0.0);
    for y in parts {
        let zp = if y.is_empty() { c(1.0, 0.0) } else { jacobi_trudi(y, &s) * folding_sign(y) };
        total += zp * plucker_minor(&pair, &folded(y), Sign::Minus, 10.0)?;
    }
    Ok(total)
}

fn gd_tau(spec: &GDSpec) -> Result<C64> {
    Ok(tau_determinant(&schur_modes(spec, 8.0)?)?.value)
}

fn gelfand_dickey() -> Result<Outcome> {
    let mut r = rng(800);
    let point = |r: &mut rand::rngs::StdRng| c(r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3));
    let parts = partitions_up_to(8);
    let mut worst = 0.0f64;
    let mut shell = 0.0f64;
    for _ in 0..20 {
        let spec = nilpotent_gd(point(&mut r), point(&mut r), point(&mut r));
        let m = schur_modes(&spec, 8.0)?;
        let series = series_tau(&m, 6)?;
        let brute = brute_force_gd(&spec, &parts)?;
        worst = worst.max((series.value - brute).norm()).max((tau_determinant(&m)?.value - brute).norm());
        shell = shell.max(series.diagnostic).max((series_tau(&m, 2)?.value - series.value).norm());
    }
    // degree 4 along a line: fifth differences vanish
    let (p0, v) = ([point(&mut r), point(&mut r), point(&mut r)], [point(&mut r), point(&mut r), point(&mut r)]);
    let mut vals = Vec::new();
    for k in 0..6 {
        let l = 0.2 * k as f64;
        vals.push(gd_tau(&nilpotent_gd(p0[0] + v[0] * l, p0[1] + v[1] * l, p0[2] + v[2] * l))?);
    }
    let binom = [1.0, -5.0, 10.0, -10.0, 5.0, -1.0];
    let fifth: C64 = vals.iter().zip(binom).map(|(v, b)| v * b).sum();
    let mut unit = 0.0f64;
    for _ in 0..20 {
        let mut spec = nilpotent_gd(point(&mut r), point(&mut r), point(&mut r));
        spec.x_modes.clear();
        spec.polynomial = false;
        unit = unit.max((gd_tau(&spec)? - 1.0).norm());
    }
    outcome(
        worst < 1e-10 && shell < 1e-14 && fifth.norm() < 1e-12 && unit == 0.0,
        format!(
            "max |series - brute force| = {worst:.2e}, shells beyond weight 2 {shell:.1e}, \
             fifth difference {:.1e}, max |tau(X=0) - 1| = {unit:.1e}",
            fifth.norm()
        ),
    )
}

fn multicircle() -> Result<Outcome> {
    let mut r = rng(900);
    let circ = Circle::new(c(0.3, -0.1), 1.4);
    let f = random_pair(&mut r, 2, circ, 48, 0.1);
    let k = build_contour(&[circ])?;
    let j = JumpAssignment::new(&k, vec![f.clone()])?;
    let lm = assemble_multicircle_l(&k, &j, 16.0)?;
    let lo = assemble_l(&kernel_modes_with_tol(&f, 16.0, 1.0)?) - identity(lm.nrows());
    let same = max_abs(&(&lm + &lo));
    let one = tau_determinant(&kernel_modes_with_tol(&f, 16.0, 1.0)?)?.value;
    let single = (tau_multicircle(&k, &j, 16.0)?.value - one).norm();

    let outer = Circle::new(c(0.3, -0.1), 3.0);
    let k2 = build_contour(&[outer, circ])?;
    let j2 = JumpAssignment::new(&k2, vec![FactorizationPair::identity(2, outer, 48), f.clone()])?;
    let concentric = (tau_multicircle(&k2, &j2, 16.0)?.value - one).norm();

    let layouts = [
        vec![Circle::new(c(0.0, 0.0), 2.0), Circle::new(c(0.3, 0.2), 0.6)],
        vec![Circle::new(c(0.0, 0.0), 1.0), Circle::new(c(3.5, 0.0), 1.2)],
        vec![Circle::new(c(0.0, 0.0), 3.0), Circle::new(c(-1.0, 0.0), 0.8), Circle::new(c(1.2, 0.3), 0.7)],
    ];
    let mut gap = 0.0f64;
    for seed in 0..10 {
        let circles = &layouts[seed % layouts.len()];
        let k = build_contour(circles)?;
        let pairs = circles.iter().map(|c| random_pair(&mut r, 2, *c, 48, 0.2)).collect();
        let j = JumpAssignment::new(&k, pairs)?;
        let lf = assemble_multicircle_l(&k, &j, 20.0)?;
        let lj = assemble_jump_form_l(&k, &j, 20.0)?;
        let dim = lf.nrows();
        let (a, b) = ((identity(dim) + lf).determinant(), (identity(dim) + lj).determinant());
        gap = gap.max((a - b).norm());
    }
    outcome(
        same < 1e-14 && single < 1e-13 && concentric < 1e-12 && gap < 1e-10,
        format!(
            "M = 1 matrix gap {same:.1e}, tau gap {single:.1e}; concentric {concentric:.1e}; \
             max form gap {gap:.1e} over 10 instances"
        ),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>, u64);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("strong Szego / Widom limit", strong_szego, 10),
        ("block Widom limit", block_widom, 30),
        ("series = determinant", series_vs_determinant, 60),
        ("Borodin-Okounkov identity", borodin_okounkov, 10),
        ("differentiation formula", differentiation, 20),
        ("Plucker identity", plucker, 30),
        ("Painleve VI consistency", painleve_vi, 120),
        ("Gelfand-Dickey polynomial tau", gelfand_dickey, 20),
        ("multicircle reductions", multicircle, 60),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {}: {} {name}: {detail} [{:.2}s, budget {budget}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
