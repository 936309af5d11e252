//! Reference evaluation of the model built from first principles.
//!
//! Relative deprivation is computed from its definition over explicit
//! reference groups (population masses and incomes), not from the simplified
//! closed forms the library uses. Roots are found by bisection and by Newton
//! iteration on finite-difference Jacobians.

#![allow(dead_code)]

use assimdyn::ModelParams;

/// Population mass and income of one homogeneous subgroup.
#[derive(Clone, Copy)]
struct Member {
    mass: f64,
    income: f64,
}

/// Share of the group earning more than `income`, times their mean excess.
fn deprivation(income: f64, group: &[Member]) -> f64 {
    let total: f64 = group.iter().map(|g| g.mass).sum();
    group
        .iter()
        .filter(|g| g.income > income)
        .map(|g| g.mass / total * (g.income - income))
        .sum()
}

#[derive(Debug, Clone, Copy)]
pub struct Utilities {
    pub hs: f64,
    pub ls: f64,
    pub a: f64,
    pub na: f64,
}

pub fn utilities(pr: &ModelParams, p: f64, q: f64) -> Utilities {
    let natives = pr.n;
    let migrants = pr.m * pr.n;
    let levy = p * migrants * pr.allowance / natives;

    let hs = pr.i_hs + q * pr.i_e - levy;
    let ls = pr.i_ls + q * pr.i_e - levy;
    let a = pr.i_a + q * pr.i_e;
    let na = pr.i_na;

    let hs_m = Member { mass: q * natives, income: hs };
    let ls_m = Member { mass: (1.0 - q) * natives, income: ls };
    let a_m = Member { mass: p * migrants, income: a };
    let na_m = Member { mass: (1.0 - p) * migrants, income: na };

    // Natives compare within natives plus assimilated migrants; assimilated
    // migrants compare with everyone; the rest only with fellow migrants.
    let native_ref = [hs_m, ls_m, a_m];
    let everyone = [hs_m, ls_m, a_m, na_m];
    let migrant_ref = [a_m, na_m];

    let b = pr.beta;
    Utilities {
        hs: (1.0 - b) * hs - q * pr.c_hs - b * deprivation(hs, &native_ref),
        ls: (1.0 - b) * ls - b * deprivation(ls, &native_ref),
        a: (1.0 - b) * a - (pr.c_a - pr.allowance) - b * deprivation(a, &everyone),
        na: (1.0 - b) * na - b * deprivation(na, &migrant_ref),
    }
}

/// `(u_A - u_NA, u_HS - u_LS)`.
pub fn gaps(pr: &ModelParams, p: f64, q: f64) -> [f64; 2] {
    let u = utilities(pr, p, q);
    [u.a - u.na, u.hs - u.ls]
}

pub fn field(pr: &ModelParams, p: f64, q: f64) -> [f64; 2] {
    let [h1, h2] = gaps(pr, p, q);
    [p * (1.0 - p) * h1, q * (1.0 - q) * h2]
}

/// Native-only economy: nobody migrates.
pub fn closed_gap(pr: &ModelParams, q: f64) -> f64 {
    let closed = ModelParams { m: 0.0, allowance: 0.0, ..*pr };
    gaps(&closed, 0.0, q)[1]
}

pub fn sw_natives(pr: &ModelParams, p: f64, q: f64) -> f64 {
    let u = utilities(pr, p, q);
    pr.n * (q * u.hs + (1.0 - q) * u.ls)
}

pub fn sw_migrants(pr: &ModelParams, p: f64, q: f64) -> f64 {
    let u = utilities(pr, p, q);
    pr.m * pr.n * (p * u.a + (1.0 - p) * u.na)
}

/// Root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(f_lo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: impl Fn(f64, f64) -> [f64; 2], x: [f64; 2], h: f64) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for k in 0..2 {
        let mut up = x;
        let mut dn = x;
        up[k] += h;
        dn[k] -= h;
        let (fu, fd) = (f(up[0], up[1]), f(dn[0], dn[1]));
        for i in 0..2 {
            j[i][k] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    j
}

/// Newton iteration for `f = 0` from `x0`. Returns the root when the
/// residual falls below `tol`.
pub fn newton(f: impl Fn(f64, f64) -> [f64; 2], x0: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let mut x = x0;
    for _ in 0..100 {
        let r = f(x[0], x[1]);
        if r[0].abs().max(r[1].abs()) < tol {
            return Some(x);
        }
        let j = fd_jacobian(&f, x, 1e-7);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dy = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        x = [x[0] - dx, x[1] - dy];
        if !x[0].is_finite() || !x[1].is_finite() {
            return None;
        }
    }
    let r = f(x[0], x[1]);
    (r[0].abs().max(r[1].abs()) < tol).then_some(x)
}

/// High-skill share where natives are indifferent at assimilation level `p`.
pub fn skill_root(pr: &ModelParams, p: f64) -> f64 {
    bisect(|q| gaps(pr, p, q)[1], 0.0, 1.0)
}

/// Allowance at which migrants at `(p, q)` are indifferent. `h1` is affine
/// in the allowance while `A < c_A` keeps income ranks fixed, so two
/// evaluations in that range determine it.
pub fn indifference_allowance(pr: &ModelParams, p: f64, q: f64) -> f64 {
    let probe = 0.5 * pr.c_a;
    let h0 = gaps(&pr.with_allowance(0.0), p, q)[0];
    let h1 = gaps(&pr.with_allowance(probe), p, q)[0];
    -h0 * probe / (h1 - h0)
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}
