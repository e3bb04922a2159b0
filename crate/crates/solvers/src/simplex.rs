//! Dense two-phase primal simplex with variable bounds.
//!
//! Nothing clever: full tableau, explicit artificial columns, Dantzig
//! pricing with a switch to Bland's rule after a degenerate streak. Sized
//! for the micro branch-and-bound oracle and the SLP subproblems, not for
//! production LPs.

use model_ir::{Cmp, ModelIR, Sense};

const PIVOT_TOL: f64 = 1e-9;
const RC_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGEN_STREAK_FOR_BLAND: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    /// Structural variable values and the objective in the model's sense.
    Optimal { values: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, thiserror::Error)]
pub enum SimplexError {
    #[error("simplex iteration limit exceeded ({0} pivots)")]
    IterationLimit(usize),
}

/// Standard-form cache built once per model; bound overrides make it
/// reusable across branch-and-bound nodes.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n_struct: usize,
    rows: usize,
    /// Structural coefficients, row-major `rows × n_struct`.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Bounds for structural variables then row slacks.
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Minimization costs over structural variables.
    cost: Vec<f64>,
    /// -1 when the model maximizes and costs were negated.
    obj_sign: f64,
}

impl LpProblem {
    pub fn from_model(m: &ModelIR) -> Self {
        let n = m.num_vars();
        let rows = m.constraints.len();
        let mut a = vec![0.0; rows * n];
        let mut b = vec![0.0; rows];
        let mut lower: Vec<f64> = m.vars.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = m.vars.iter().map(|v| v.upper).collect();
        for (i, c) in m.constraints.iter().enumerate() {
            for &(id, coeff) in &c.terms {
                a[i * n + id.0] += coeff;
            }
            b[i] = c.rhs;
            // slack bounds encode the row type
            let (lo, hi) = match c.cmp {
                Cmp::Le => (0.0, f64::INFINITY),
                Cmp::Eq => (0.0, 0.0),
                Cmp::Ge => (f64::NEG_INFINITY, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let obj_sign = match m.objective.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; n];
        for &(id, coeff) in &m.objective.terms {
            cost[id.0] += obj_sign * coeff;
        }
        Self { n_struct: n, rows, a, b, lower, upper, cost, obj_sign }
    }

    /// Solve with the cached bounds.
    pub fn solve(&self) -> Result<LpResult, SimplexError> {
        self.solve_with_bounds(None)
    }

    /// Solve with overridden structural bounds (branching, trust regions).
    pub fn solve_with_bounds(
        &self,
        struct_bounds: Option<(&[f64], &[f64])>,
    ) -> Result<LpResult, SimplexError> {
        let m = self.rows;
        let cols = self.n_struct + m; // structural + slacks
        let n_total = cols + m; // + artificials
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        if let Some((lo, up)) = struct_bounds {
            lower[..self.n_struct].copy_from_slice(lo);
            upper[..self.n_struct].copy_from_slice(up);
        }
        for j in 0..self.n_struct {
            if lower[j] > upper[j] + FEAS_TOL {
                return Ok(LpResult::Infeasible);
            }
        }
        // artificial columns, locked unless a row needs one
        lower.extend(std::iter::repeat(0.0).take(m));
        upper.extend(std::iter::repeat(0.0).take(m));

        // Tableau rows over all columns.
        let mut t = vec![0.0; m * n_total];
        for i in 0..m {
            t[i * n_total..i * n_total + self.n_struct]
                .copy_from_slice(&self.a[i * self.n_struct..(i + 1) * self.n_struct]);
            t[i * n_total + self.n_struct + i] = 1.0; // slack
        }

        // Nonbasic start: everything at its finite bound nearest zero.
        let mut value = vec![0.0; n_total];
        for j in 0..cols {
            let (lo, hi) = (lower[j], upper[j]);
            value[j] = if lo.is_finite() && hi.is_finite() {
                if lo.abs() <= hi.abs() {
                    lo
                } else {
                    hi
                }
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
        }

        // Residuals absorbed by the slack where its bounds allow, otherwise
        // by an artificial column carrying the leftover.
        let mut basis = vec![0usize; m];
        let mut beta = vec![0.0; m];
        let mut is_basic = vec![false; n_total];
        for i in 0..m {
            let mut r = self.b[i];
            for j in 0..self.n_struct {
                let av = t[i * n_total + j];
                if av != 0.0 {
                    r -= av * value[j];
                }
            }
            let s = self.n_struct + i;
            let clamped = r.clamp(lower[s], upper[s]);
            let res = r - clamped;
            let art = cols + i;
            if res.abs() <= FEAS_TOL {
                value[s] = 0.0;
                basis[i] = s;
                beta[i] = r;
                is_basic[s] = true;
                t[i * n_total + art] = 1.0;
            } else {
                value[s] = clamped;
                if res < 0.0 {
                    // scale the row so the artificial column is a unit vector
                    for x in t[i * n_total..(i + 1) * n_total].iter_mut() {
                        *x = -*x;
                    }
                }
                t[i * n_total + art] = 1.0;
                basis[i] = art;
                beta[i] = res.abs();
                is_basic[art] = true;
                upper[art] = f64::INFINITY;
            }
        }

        let max_iters = 20_000 + 50 * (m + n_total);
        let mut iters = 0usize;

        // Phase 1: minimize the sum of artificials.
        let mut d = vec![0.0; n_total];
        for j in cols..n_total {
            d[j] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= cols {
                for j in 0..n_total {
                    d[j] -= t[i * n_total + j];
                }
            }
        }
        self.pivot_loop(
            &mut t, &mut d, &mut basis, &mut beta, &mut value, &mut is_basic,
            &lower, &upper, cols, n_total, true, &mut iters, max_iters,
        )?;
        let infeas: f64 = (0..m).filter(|&i| basis[i] >= cols).map(|i| beta[i].abs()).sum();
        if infeas > 1e-6 {
            return Ok(LpResult::Infeasible);
        }
        // Drive surviving artificials out of the basis where possible.
        for i in 0..m {
            if basis[i] < cols {
                continue;
            }
            let row = &t[i * n_total..i * n_total + cols];
            if let Some(j) = (0..cols).find(|&j| !is_basic[j] && row[j].abs() > 1e-7) {
                self.do_pivot(&mut t, &mut d, &mut basis, &mut beta, &mut value, &mut is_basic, i, j, 0.0, 1.0, &lower, &upper, n_total);
            }
            // otherwise the row is redundant; the artificial stays basic at 0
        }
        for j in cols..n_total {
            lower[j] = 0.0;
            upper[j] = 0.0;
        }

        // Phase 2: real costs.
        let mut d = vec![0.0; n_total];
        d[..self.n_struct].copy_from_slice(&self.cost);
        for i in 0..m {
            let cb = if basis[i] < self.n_struct { self.cost[basis[i]] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..n_total {
                    d[j] -= cb * t[i * n_total + j];
                }
            }
        }
        let unbounded = !self.pivot_loop(
            &mut t, &mut d, &mut basis, &mut beta, &mut value, &mut is_basic,
            &lower, &upper, cols, n_total, false, &mut iters, max_iters,
        )?;
        if unbounded {
            return Ok(LpResult::Unbounded);
        }

        let mut values = vec![0.0; self.n_struct];
        for j in 0..self.n_struct {
            values[j] = value[j];
        }
        for i in 0..m {
            if basis[i] < self.n_struct {
                values[basis[i]] = beta[i];
            }
        }
        let objective: f64 = self.obj_sign * values.iter().zip(&self.cost).map(|(x, c)| x * c).sum::<f64>();
        Ok(LpResult::Optimal { values, objective })
    }

    /// Run pivots until optimal (returns `Ok(true)`) or unbounded
    /// (`Ok(false)`, phase 2 only).
    #[allow(clippy::too_many_arguments)]
    fn pivot_loop(
        &self,
        t: &mut [f64],
        d: &mut [f64],
        basis: &mut [usize],
        beta: &mut [f64],
        value: &mut [f64],
        is_basic: &mut [bool],
        lower: &[f64],
        upper: &[f64],
        cols: usize,
        n_total: usize,
        phase1: bool,
        iters: &mut usize,
        max_iters: usize,
    ) -> Result<bool, SimplexError> {
        let m = basis.len();
        let mut degen_streak = 0usize;
        loop {
            *iters += 1;
            if *iters > max_iters {
                return Err(SimplexError::IterationLimit(*iters));
            }
            let scan = if phase1 { n_total } else { cols };
            let bland = degen_streak >= DEGEN_STREAK_FOR_BLAND;

            // entering column
            let mut enter = None;
            let mut best = RC_TOL;
            for j in 0..scan {
                if is_basic[j] || lower[j] == upper[j] {
                    continue;
                }
                let rc = d[j];
                let eligible_up = rc < -RC_TOL && value[j] < upper[j];
                let eligible_down = rc > RC_TOL && value[j] > lower[j];
                if eligible_up || eligible_down {
                    if bland {
                        enter = Some((j, if eligible_up { 1.0 } else { -1.0 }));
                        break;
                    }
                    if rc.abs() > best {
                        best = rc.abs();
                        enter = Some((j, if eligible_up { 1.0 } else { -1.0 }));
                    }
                }
            }
            let Some((je, sigma)) = enter else {
                return Ok(true);
            };

            // ratio test
            let own_room = if sigma > 0.0 { upper[je] - value[je] } else { value[je] - lower[je] };
            let mut t_max = own_room;
            let mut leave: Option<usize> = None;
            for i in 0..m {
                let a = t[i * n_total + je];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let w = sigma * a;
                let jb = basis[i];
                let room = if w > 0.0 {
                    if lower[jb].is_finite() {
                        (beta[i] - lower[jb]) / w
                    } else {
                        f64::INFINITY
                    }
                } else if upper[jb].is_finite() {
                    (upper[jb] - beta[i]) / -w
                } else {
                    f64::INFINITY
                };
                let room = room.max(0.0);
                if room < t_max - 1e-12 || (room < t_max + 1e-12 && leave.is_some_and(|r| {
                    // deterministic tie-break: smaller basis var index leaves
                    basis[i] < basis[r]
                })) {
                    t_max = room.min(t_max);
                    leave = Some(i);
                }
            }

            if t_max.is_infinite() {
                return Ok(false); // unbounded
            }
            if t_max <= 1e-10 {
                degen_streak += 1;
            } else {
                degen_streak = 0;
            }

            match leave {
                None => {
                    // bound flip
                    let step = sigma * t_max;
                    for i in 0..m {
                        let a = t[i * n_total + je];
                        if a.abs() > PIVOT_TOL {
                            beta[i] -= a * step;
                        }
                    }
                    value[je] += step;
                }
                Some(r) => {
                    self.do_pivot(t, d, basis, beta, value, is_basic, r, je, t_max, sigma, lower, upper, n_total);
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn do_pivot(
        &self,
        t: &mut [f64],
        d: &mut [f64],
        basis: &mut [usize],
        beta: &mut [f64],
        value: &mut [f64],
        is_basic: &mut [bool],
        r: usize,
        je: usize,
        t_step: f64,
        sigma: f64,
        lower: &[f64],
        upper: &[f64],
        n_total: usize,
    ) {
        let m = basis.len();
        let jl = basis[r];
        let w_r = sigma * t[r * n_total + je];
        // move every basic value along the step
        for i in 0..m {
            let a = t[i * n_total + je];
            if a.abs() > PIVOT_TOL && i != r {
                beta[i] -= sigma * a * t_step;
            }
        }
        let entering_value = value[je] + sigma * t_step;
        // leaving variable lands on the bound it ran into
        let leave_val = if w_r > 0.0 { lower[jl] } else { upper[jl] };
        value[jl] = if leave_val.is_finite() { leave_val } else { 0.0 };
        is_basic[jl] = false;

        // eliminate the entering column
        let piv = t[r * n_total + je];
        let inv = 1.0 / piv;
        for x in t[r * n_total..(r + 1) * n_total].iter_mut() {
            *x *= inv;
        }
        let (pre, rest) = t.split_at_mut(r * n_total);
        let (prow, post) = rest.split_at_mut(n_total);
        for chunk in pre.chunks_exact_mut(n_total) {
            let f = chunk[je];
            if f.abs() > PIVOT_TOL {
                for (x, p) in chunk.iter_mut().zip(prow.iter()) {
                    *x -= f * *p;
                }
            }
        }
        for chunk in post.chunks_exact_mut(n_total) {
            let f = chunk[je];
            if f.abs() > PIVOT_TOL {
                for (x, p) in chunk.iter_mut().zip(prow.iter()) {
                    *x -= f * *p;
                }
            }
        }
        let fd = d[je];
        if fd.abs() > PIVOT_TOL {
            for (x, p) in d.iter_mut().zip(prow.iter()) {
                *x -= fd * *p;
            }
        }

        basis[r] = je;
        beta[r] = entering_value;
        is_basic[je] = true;
    }
}
