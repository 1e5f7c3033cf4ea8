//! The downstream nonlocal term W in all four regimes: general p by
//! piecewise quadrature, the exact exponential recursion, the geometric-mean
//! operator (p = 0) and the weighted-supremum operator (p = ∞).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::kernel::{Kernel, KernelShape};
use crate::scenario::PNorm;

/// Per-edge values of the nonlocal term. W lives at cell edges so interface
/// fluxes and the identity's finite difference share locations.
#[derive(Debug, Clone)]
pub struct NonlocalField {
    pub grid: Grid,
    /// W at each of the `n_cells + 1` edges.
    pub w: Vec<f64>,
    /// W^p at each edge (equal to `w` for the p = 0 and p = ∞ limits).
    pub wp: Vec<f64>,
    pub p: PNorm,
    pub eta: f64,
}

impl NonlocalField {
    fn from_wp(grid: Grid, wp: Vec<f64>, p: f64, eta: f64) -> Result<Self> {
        if wp.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Operator("nonlocal term not finite".into()));
        }
        let w = wp.iter().map(|v| v.powf(1.0 / p)).collect();
        Ok(Self {
            grid,
            w,
            wp,
            p: PNorm::Finite(p),
            eta,
        })
    }

    /// Linear interpolation of the edge values at position `x`, extended as
    /// constant beyond the grid.
    pub fn interp(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let pos = (x - self.grid.x_min) / dx;
        if pos <= 0.0 {
            return self.w[0];
        }
        let n = self.grid.n_cells;
        if pos >= n as f64 {
            return self.w[n];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.w[i] * (1.0 - frac) + self.w[i + 1] * frac
    }
}

fn check_normalized_lp(kernel: &Kernel, p: f64) -> Result<()> {
    let norm = kernel.lp_norm(p)?;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Operator(format!(
            "kernel not normalized for p = {p} (‖γ‖ = {norm})"
        )));
    }
    Ok(())
}

/// W_{p,η} for a general normalized kernel, evaluated at every cell edge.
///
/// W^p(x) = (1/η) Σ_cells q_j^p ∫_{cell_j ∩ (x,∞)} γ((y−x)/η)^p dy, with
/// constant extrapolation of `q` beyond the grid. The p-th root is taken
/// once at the end.
pub fn eval_w_general(q: &Field, kernel: &Kernel, p: f64, eta: f64) -> Result<NonlocalField> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Operator(format!("p must be in (0, ∞), got {p}")));
    }
    check_normalized_lp(kernel, p)?;
    let grid = q.grid;
    let n = grid.n_cells;
    let dx = grid.dx();
    let qp: Vec<f64> = q.values.iter().map(|v| v.powf(p)).collect();
    let qbr_p = q.right_boundary().powf(p);

    let mut wp = vec![0.0; n + 1];
    match &kernel.shape {
        KernelShape::Constant => {
            // γ^p ≡ scale^p on (0,1): prefix sums give O(n) evaluation.
            let gp = kernel.scale.powf(p);
            let mut prefix = vec![0.0; n + 1];
            for j in 0..n {
                prefix[j + 1] = prefix[j] + qp[j] * dx;
            }
            for (i, w) in wp.iter_mut().enumerate() {
                let end = grid.edge(i) + eta;
                let mut acc = 0.0;
                if end >= grid.x_max {
                    acc += prefix[n] - prefix[i];
                    acc += qbr_p * (end - grid.x_max);
                } else {
                    let pos = (end - grid.x_min) / dx;
                    let m = (pos.floor() as usize).min(n - 1);
                    acc += prefix[m] - prefix[i];
                    acc += qp[m] * (end - grid.edge(m));
                }
                *w = gp * acc / eta;
            }
        }
        KernelShape::Exponential => {
            // γ_p(s) = scale e^{-s}: per-cell closed form, truncated where the
            // weight has decayed below 1e-14 of the leading term.
            let gp = kernel.scale.powf(p);
            for (i, w) in wp.iter_mut().enumerate() {
                let mut acc = 0.0;
                let mut s_lo = 0.0;
                let mut done = false;
                for (j, &qpj) in qp.iter().enumerate().skip(i) {
                    let s_hi = (grid.edge(j + 1) - grid.edge(i)) / eta;
                    acc += qpj * ((-p * s_lo).exp() - (-p * s_hi).exp()) / p;
                    s_lo = s_hi;
                    if (-p * s_hi).exp() < 1e-14 {
                        done = true;
                        break;
                    }
                }
                if !done {
                    // Tail beyond the grid with the boundary value, exact.
                    acc += qbr_p * (-p * s_lo).exp() / p;
                }
                *w = gp * acc;
            }
        }
        KernelShape::Custom { .. } => {
            for (i, w) in wp.iter_mut().enumerate() {
                let x = grid.edge(i);
                let mut acc = 0.0;
                for (j, &qpj) in qp.iter().enumerate().skip(i) {
                    let s_a = (grid.edge(j) - x) / eta;
                    let s_b = (grid.edge(j + 1) - x) / eta;
                    if s_a >= 1.0 {
                        break;
                    }
                    acc += qpj * kernel.p_power_integral(s_a, s_b, p);
                }
                let s_grid_end = (grid.x_max - x) / eta;
                if s_grid_end < 1.0 {
                    acc += qbr_p * kernel.p_power_integral(s_grid_end, 1.0, p);
                }
                *w = acc;
            }
        }
    }
    NonlocalField::from_wp(grid, wp, p, eta)
}

/// Exact backward recursion for the exponential operator: for edge spacing Δ,
///
/// W^p(x_i) = e^{−pΔ/η} W^p(x_{i+1}) + q_i^p (1 − e^{−pΔ/η}),
///
/// seeded at the right boundary with the boundary density. Exact for
/// piecewise-constant q — no quadrature error.
pub fn eval_w_exponential(q: &Field, p: f64, eta: f64) -> Result<NonlocalField> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Operator(format!("p must be in (0, ∞), got {p}")));
    }
    // Written as a negated comparison so that NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(eta > 0.0) {
        return Err(Error::Operator("eta must be positive".into()));
    }
    let grid = q.grid;
    let n = grid.n_cells;
    let decay = (-p * grid.dx() / eta).exp();
    let mut wp = vec![0.0; n + 1];
    wp[n] = q.right_boundary().powf(p);
    for i in (0..n).rev() {
        wp[i] = decay * wp[i + 1] + q.values[i].powf(p) * (1.0 - decay);
    }
    NonlocalField::from_wp(grid, wp, p, eta)
}

/// Geometric-mean operator (p = 0):
/// W(x) = exp((1/η) ∫_x^{x+η} ln(γ₀((y−x)/η) q(y)) dy).
///
/// The kernel contributes the constant ∫₀¹ ln γ₀, which is zero for a
/// geometric-mean-normalized kernel; the density part reduces to exact
/// per-cell log integrals.
pub fn eval_w_zero(q: &Field, kernel: &Kernel, eta: f64) -> Result<NonlocalField> {
    if !kernel.finite_support() {
        return Err(Error::Operator(
            "p = 0 operator requires a finite-support kernel".into(),
        ));
    }
    let norm = kernel.l0_geometric_norm()?;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Operator(format!(
            "kernel not geometric-mean normalized (‖γ‖_L0 = {norm})"
        )));
    }
    if q.min() <= 0.0 {
        return Err(Error::Operator(
            "p = 0 operator requires a strictly positive density".into(),
        ));
    }
    let grid = q.grid;
    let n = grid.n_cells;
    let dx = grid.dx();
    let log_gamma_mean = norm.ln();
    let lnq: Vec<f64> = q.values.iter().map(|v| v.ln()).collect();
    let lnq_br = q.right_boundary().ln();
    let mut prefix = vec![0.0; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] + lnq[j] * dx;
    }
    let mut w = vec![0.0; n + 1];
    for (i, wi) in w.iter_mut().enumerate() {
        let end = grid.edge(i) + eta;
        let mut acc = 0.0;
        if end >= grid.x_max {
            acc += prefix[n] - prefix[i];
            acc += lnq_br * (end - grid.x_max);
        } else {
            let pos = (end - grid.x_min) / dx;
            let m = (pos.floor() as usize).min(n - 1);
            acc += prefix[m] - prefix[i];
            acc += lnq[m] * (end - grid.edge(m));
        }
        *wi = (log_gamma_mean + acc / eta).exp();
    }
    Ok(NonlocalField {
        grid,
        wp: w.clone(),
        w,
        p: PNorm::Zero,
        eta,
    })
}

/// Weighted-supremum operator (p = ∞):
/// W(x) = max_{s ∈ [0,1]} γ(s) q(x + ηs).
///
/// With a nonincreasing γ and piecewise-constant q, the maximum over each
/// subinterval of constant q is attained at its left end, so evaluating at
/// interval endpoints is exact. The constant kernel reduces to a sliding
/// window maximum computed in O(n) with a monotone index deque.
pub fn eval_w_sup(q: &Field, kernel: &Kernel, eta: f64) -> Result<NonlocalField> {
    if !kernel.finite_support() {
        return Err(Error::Unsupported(
            "p = ∞ operator is undefined for infinite-support kernels".into(),
        ));
    }
    let grid = q.grid;
    let n = grid.n_cells;
    let dx = grid.dx();
    let qbr = q.right_boundary();
    let mut w = vec![0.0; n + 1];

    match &kernel.shape {
        KernelShape::Constant => {
            let g = kernel.scale;
            // Cell j overlaps (x_i, x_i + η) iff i <= j <= m_i.
            let last_cell = |i: usize| -> usize {
                let pos = (i as f64 * dx + eta) / dx;
                ((pos - 1e-9).floor() as usize).min(n - 1)
            };
            let mut deque: VecDeque<usize> = VecDeque::new();
            let mut pushed = 0usize;
            // The index drives both the window bound and the deque eviction.
            #[allow(clippy::needless_range_loop)]
            for i in 0..n {
                let m = last_cell(i);
                while pushed <= m {
                    while let Some(&back) = deque.back() {
                        if q.values[back] <= q.values[pushed] {
                            deque.pop_back();
                        } else {
                            break;
                        }
                    }
                    deque.push_back(pushed);
                    pushed += 1;
                }
                while let Some(&front) = deque.front() {
                    if front < i {
                        deque.pop_front();
                    } else {
                        break;
                    }
                }
                let mut max = q.values[*deque.front().unwrap()];
                if grid.edge(i) + eta > grid.x_max {
                    max = max.max(qbr);
                }
                w[i] = g * max;
            }
            w[n] = g * qbr;
        }
        KernelShape::Exponential => unreachable!(),
        KernelShape::Custom { .. } => {
            for (i, wi) in w.iter_mut().enumerate() {
                let x = grid.edge(i);
                // Candidate s = 0 with the cell just right of the edge.
                let q_at = |j: usize| if j < n { q.values[j] } else { qbr };
                let mut max = kernel.eval(0.0) * q_at(i);
                for j in (i + 1)..=n {
                    let s = (grid.edge(j) - x) / eta;
                    if s >= 1.0 {
                        break;
                    }
                    max = max.max(kernel.eval(s) * q_at(j));
                }
                *wi = max;
            }
        }
    }
    Ok(NonlocalField {
        grid,
        wp: w.clone(),
        w,
        p: PNorm::Infinity,
        eta,
    })
}

/// Dispatch to the appropriate operator for a normalized kernel.
pub fn eval_w(q: &Field, kernel: &Kernel, p: PNorm, eta: f64) -> Result<NonlocalField> {
    match p {
        PNorm::Finite(p) => match kernel.shape {
            KernelShape::Exponential => eval_w_exponential(q, p, eta),
            _ => eval_w_general(q, kernel, p, eta),
        },
        PNorm::Zero => eval_w_zero(q, kernel, eta),
        PNorm::Infinity => eval_w_sup(q, kernel, eta),
    }
}

/// Per-edge residual of the identity q^p = W^p − η W^{p−1} ∂ₓW at interior
/// edges, with a centered difference for ∂ₓW and the density at an edge taken
/// from the cell to its right. Valid for exponential-operator fields; the
/// half-cell offset of the density makes the residual first order in dx.
pub fn exponential_identity_residuals(q: &Field, w: &NonlocalField) -> Result<Vec<f64>> {
    let p = match w.p {
        PNorm::Finite(p) => p,
        _ => {
            return Err(Error::Operator(
                "identity check applies to finite p only".into(),
            ))
        }
    };
    if q.grid != w.grid {
        return Err(Error::GridMismatch);
    }
    let n = q.grid.n_cells;
    let dx = q.grid.dx();
    let mut res = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let q_edge = q.values[i];
        let dw = (w.w[i + 1] - w.w[i - 1]) / (2.0 * dx);
        res.push((q_edge.powf(p) - w.wp[i] + w.eta * w.w[i].powf(p - 1.0) * dw).abs());
    }
    Ok(res)
}

/// Maximum identity residual over all interior edges — the module's
/// convergence witness.
pub fn check_exponential_identity(q: &Field, w: &NonlocalField) -> Result<f64> {
    Ok(exponential_identity_residuals(q, w)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{field_from_datum, Datum};
    use crate::kernel::NormMode;

    fn grid(n: usize) -> Grid {
        Grid::new(-4.0, 4.0, n).unwrap()
    }

    fn riemann_up(n: usize) -> Field {
        field_from_datum(
            Datum::Riemann {
                a: 0.5,
                b: 1.0,
                jump: 0.0,
            },
            grid(n),
        )
        .unwrap()
    }

    fn edge_at(g: Grid, x: f64) -> usize {
        g.nearest_edge(x)
    }

    #[test]
    fn general_constant_datum_fixed_point() {
        let q = field_from_datum(Datum::Constant { value: 0.75 }, grid(64)).unwrap();
        let k = Kernel::constant();
        let w = eval_w_general(&q, &k, 2.0, 0.5).unwrap();
        for v in &w.w {
            assert!((v - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn general_constant_kernel_riemann_values() {
        let q = riemann_up(32); // dx = 0.25, edges on quarter points
        let k = Kernel::constant();
        let w1 = eval_w_general(&q, &k, 1.0, 0.5).unwrap();
        let i = edge_at(q.grid, -0.25);
        assert!((w1.w[i] - 0.75).abs() < 1e-12);

        let w2 = eval_w_general(&q, &k, 2.0, 0.5).unwrap();
        assert!((w2.w[i] - 0.625f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_recursion_constant_datum() {
        let q = field_from_datum(Datum::Constant { value: 0.6 }, grid(100)).unwrap();
        for p in [0.25, 1.0, 3.0] {
            let w = eval_w_exponential(&q, p, 0.7).unwrap();
            for v in &w.w {
                assert!((v - 0.6).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn exponential_recursion_step_closed_form() {
        // W^p(x) = a^p (1 − e^{px/η}) + b^p e^{px/η} for x < 0.
        let q = riemann_up(32);
        let i = edge_at(q.grid, -0.25);
        let w1 = eval_w_exponential(&q, 1.0, 0.5).unwrap();
        let expect1 = 0.5 * (1.0 - (-0.5f64).exp()) + (-0.5f64).exp();
        assert!((w1.w[i] - expect1).abs() < 1e-14);
        assert!((expect1 - 0.8032653).abs() < 1e-6);

        let w2 = eval_w_exponential(&q, 2.0, 0.5).unwrap();
        let expect2 = (0.25 * (1.0 - (-1.0f64).exp()) + (-1.0f64).exp()).sqrt();
        assert!((w2.w[i] - expect2).abs() < 1e-14);
        assert!((expect2 - 0.72520).abs() < 1e-4);
    }

    #[test]
    fn general_agrees_with_exponential_recursion() {
        let q = riemann_up(200);
        for p in [0.5, 1.0, 2.0, 4.0] {
            let k = Kernel::exponential().normalize(NormMode::Lp(p)).unwrap();
            let wg = eval_w_general(&q, &k, p, 0.5).unwrap();
            let we = eval_w_exponential(&q, p, 0.5).unwrap();
            let dev = wg
                .w
                .iter()
                .zip(&we.w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-10, "p = {p}: dev = {dev}");
        }
    }

    #[test]
    fn zero_operator_values() {
        let q = riemann_up(32);
        let k = Kernel::constant();
        let w = eval_w_zero(&q, &k, 0.5).unwrap();
        let i = edge_at(q.grid, -0.25);
        assert!((w.w[i] - 0.5f64.sqrt()).abs() < 1e-12);
        // Window fully in the right state.
        let j = edge_at(q.grid, 0.5);
        assert!((w.w[j] - 1.0).abs() < 1e-12);
        // Constant datum.
        let qc = field_from_datum(Datum::Constant { value: 0.7 }, grid(32)).unwrap();
        let wc = eval_w_zero(&qc, &k, 0.5).unwrap();
        for v in &wc.w {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_operator_rejects_zero_density() {
        let g = grid(8);
        let q = Field::new(g, vec![0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(eval_w_zero(&q, &Kernel::constant(), 0.5).is_err());
    }

    #[test]
    fn sup_operator_values() {
        let q = riemann_up(32);
        let k = Kernel::constant();
        let w = eval_w_sup(&q, &k, 0.5).unwrap();
        let i = edge_at(q.grid, -0.25);
        assert!((w.w[i] - 1.0).abs() < 1e-14);
        let j = edge_at(q.grid, -0.75);
        assert!((w.w[j] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn sup_rejects_infinite_support() {
        let q = riemann_up(32);
        assert!(eval_w_sup(&q, &Kernel::exponential(), 0.5).is_err());
    }

    #[test]
    fn sup_matches_brute_force_on_custom_kernel() {
        let g = grid(40);
        let vals: Vec<f64> = (0..40).map(|i| 0.5 + 0.4 * ((i as f64) * 0.7).sin().abs()).collect();
        let q = Field::new(g, vals).unwrap();
        let k = Kernel::custom(vec![0.0, 0.5, 1.0], vec![1.0, 0.8, 0.3]).unwrap();
        let w = eval_w_sup(&q, &k, 0.5).unwrap();
        // Dense sampling oracle.
        for (i, &wi) in w.w.iter().enumerate() {
            let x = g.edge(i);
            let mut brute: f64 = 0.0;
            for m in 0..=4000 {
                let s = m as f64 / 4000.0;
                let y = x + 0.5 * s;
                // Nudge right: the window is open at its left end, so a
                // sample landing exactly on an edge reads the right cell.
                let qv = if y >= g.x_max {
                    q.right_boundary()
                } else {
                    q.values[g.cell_index(y + 1e-9)]
                };
                brute = brute.max(k.eval(s) * qv);
            }
            assert!(wi >= brute - 1e-12, "edge {i}: {wi} < {brute}");
            assert!(wi <= brute + 1e-3, "edge {i}: {wi} vs {brute}");
        }
    }

    #[test]
    fn sandwich_property_all_variants() {
        let q = riemann_up(64);
        let (lo, hi) = (0.5, 1.0);
        let check = |w: &NonlocalField, name: &str| {
            for v in &w.w {
                assert!(*v >= lo - 1e-10 && *v <= hi + 1e-10, "{name}: {v}");
            }
        };
        for p in [0.25, 1.0, 2.0, 16.0] {
            check(&eval_w_exponential(&q, p, 0.5).unwrap(), "exp");
            check(
                &eval_w_general(&q, &Kernel::constant(), p, 0.5).unwrap(),
                "const",
            );
        }
        check(&eval_w_zero(&q, &Kernel::constant(), 0.5).unwrap(), "zero");
        check(&eval_w_sup(&q, &Kernel::constant(), 0.5).unwrap(), "sup");
    }

    #[test]
    fn monotone_datum_gives_monotone_w() {
        let q = riemann_up(64);
        let monotone = |w: &NonlocalField| {
            w.w.windows(2).all(|v| v[1] - v[0] >= -1e-12)
        };
        for p in [0.25, 1.0, 4.0] {
            assert!(monotone(&eval_w_exponential(&q, p, 0.5).unwrap()));
            assert!(monotone(
                &eval_w_general(&q, &Kernel::constant(), p, 0.5).unwrap()
            ));
        }
        assert!(monotone(&eval_w_zero(&q, &Kernel::constant(), 0.5).unwrap()));
        assert!(monotone(&eval_w_sup(&q, &Kernel::constant(), 0.5).unwrap()));
    }

    #[test]
    fn p_limits_converge_to_limit_operators() {
        let q = riemann_up(160);
        let k = Kernel::constant();
        let w0 = eval_w_zero(&q, &k, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for p in [0.1, 0.05, 0.02] {
            let wp = eval_w_general(&q, &k, p, 0.5).unwrap();
            let dev = wp
                .w
                .iter()
                .zip(&w0.w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < prev, "p = {p}: {dev} !< {prev}");
            prev = dev;
        }

        let winf = eval_w_sup(&q, &k, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for p in [8.0, 16.0, 32.0] {
            let wp = eval_w_general(&q, &k, p, 0.5).unwrap();
            let dev = wp
                .w
                .iter()
                .zip(&winf.w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < prev, "p = {p}: {dev} !< {prev}");
            prev = dev;
        }
    }

    #[test]
    fn identity_zero_for_constant_datum() {
        let q = field_from_datum(Datum::Constant { value: 0.7 }, grid(100)).unwrap();
        for p in [0.5, 1.0, 3.0] {
            let w = eval_w_exponential(&q, p, 0.5).unwrap();
            let r = check_exponential_identity(&q, &w).unwrap();
            assert!(r < 1e-13, "p = {p}: {r}");
        }
    }

    fn tanh_residual(n: usize) -> f64 {
        let g = grid(n);
        let q = Field::from_fn(g, |x| 0.75 + 0.25 * x.tanh()).unwrap();
        let w = eval_w_exponential(&q, 1.0, 0.5).unwrap();
        check_exponential_identity(&q, &w).unwrap()
    }

    #[test]
    fn identity_first_order_convergence_smooth() {
        let r400 = tanh_residual(400);
        let r800 = tanh_residual(800);
        let ratio = r400 / r800;
        assert!(
            (1.5..=2.5).contains(&ratio),
            "ratio = {ratio} ({r400} / {r800})"
        );
    }

    #[test]
    fn identity_riemann_residual_localized() {
        let check = |n: usize| -> f64 {
            let q = riemann_up(n);
            let w = eval_w_exponential(&q, 1.0, 0.5).unwrap();
            let res = exponential_identity_residuals(&q, &w).unwrap();
            let jump_edge = q.grid.nearest_edge(0.0);
            res.iter()
                .enumerate()
                // residual index i corresponds to edge i + 1
                .filter(|(i, _)| (i + 1).abs_diff(jump_edge) > 3)
                .map(|(_, r)| *r)
                .fold(0.0, f64::max)
        };
        let coarse = check(400);
        let fine = check(800);
        assert!(fine < coarse, "{fine} !< {coarse}");
        let ratio = coarse / fine;
        assert!(ratio > 1.4, "interior residual not vanishing: {ratio}");
    }
}
