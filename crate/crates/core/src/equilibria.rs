//! Steady states of the closed and open economies, their stability, and the
//! allowance thresholds that govern which of them attract.
//!
//! The open system has nine families of steady states: the four corners
//! (A)-(D), the two edge roots on `q = 0` and `q = 1` (E, F), the two roots on
//! the `p = 0` and `p = 1` faces (G, H), and up to two interior roots (I) that
//! come from a quadratic in `p`. Stability is read off the analytic Jacobian.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{closed_gap, payoff_gaps, State};
use crate::params::{ensure_closed_admissible, Admissible, ModelParams};

/// Eigenvalue real parts within this band of zero are reported as marginal.
pub const STABILITY_TOL: f64 = 1e-9;
/// Slack of the closed unit square used for the in-domain flag.
pub const DOMAIN_SLACK: f64 = 1e-12;
/// Discriminants within this band of zero give a double root.
pub const DISCRIMINANT_EPS: f64 = 1e-12;

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn real(re: f64) -> Self {
        Eigenvalue { re, im: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CaseLabel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I1,
    I2,
    #[serde(rename = "closed-0")]
    Closed0,
    #[serde(rename = "closed-1")]
    Closed1,
    #[serde(rename = "closed-q*")]
    ClosedInterior,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::D => "D",
            CaseLabel::E => "E",
            CaseLabel::F => "F",
            CaseLabel::G => "G",
            CaseLabel::H => "H",
            CaseLabel::I1 => "I1",
            CaseLabel::I2 => "I2",
            CaseLabel::Closed0 => "closed-0",
            CaseLabel::Closed1 => "closed-1",
            CaseLabel::ClosedInterior => "closed-q*",
        }
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located steady state. Closed-economy states have `p = 0` and a single
/// eigenvalue (the derivative of the one-dimensional field).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub state: State,
    pub case_label: CaseLabel,
    pub in_domain: bool,
    pub eigenvalues: Vec<Eigenvalue>,
    pub stability: Stability,
}

impl SteadyState {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

/// Derived shares and allowance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// High-skill share with no assimilation.
    pub q_star: f64,
    pub q_star_interior: bool,
    /// High-skill share under full assimilation.
    pub q_star2: f64,
    pub q_star2_interior: bool,
    /// Edge root on `q = 0`.
    pub p_star: f64,
    pub p_star_interior: bool,
    /// Edge root on `q = 1`.
    pub p_star2: f64,
    pub p_star2_interior: bool,
    /// `(0, q*)` attracts iff `A < a_star`.
    pub a_star: f64,
    /// `(1, q**)` attracts iff `A > a_star2`.
    pub a_star2: f64,
    /// Assimilation cost at which `a_star` is zero.
    pub ca_bar: f64,
}

fn interior(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

pub fn q_star(params: &ModelParams) -> f64 {
    let gap = params.skill_gap();
    (1.0 - params.beta) * gap / (params.c_hs - params.beta * gap)
}

pub fn q_star2(params: &ModelParams) -> f64 {
    let gap = params.skill_gap();
    (1.0 - params.beta) * gap / (params.c_hs - params.beta / (1.0 + params.m) * gap)
}

pub fn thresholds(params: &Admissible) -> Thresholds {
    let p = params.params();
    let b = p.beta;
    let m = p.m;
    let a = p.allowance;
    let w = b / (1.0 + m);
    let gap = p.skill_gap();
    let q1 = q_star(p);
    let q2 = q_star2(p);
    let tax_share = m / (1.0 + m);

    let p1 = (w * (p.i_ls - p.i_a) + (p.c_a - a) - (1.0 - b) * (p.i_a - p.i_na))
        / (b * (tax_share * a + p.i_a - p.i_na));
    let p2 = (w * (p.i_hs - p.i_a) + (p.c_a - a) - (1.0 - b) * (p.i_a + p.i_e - p.i_na))
        / (b * (tax_share * a + p.i_a + p.i_e - p.i_na));

    let deprivation_pull = w * gap - (1.0 - b) * p.i_e;
    let ca_bar = (1.0 - b) * (p.i_a - p.i_na) - w * (p.i_ls - p.i_a) - q1 * deprivation_pull;
    let a_star = p.c_a - ca_bar;
    let a_star2 = (p.c_a + w * (p.i_ls - p.i_a) - (p.i_a - p.i_na) + q2 * (w * gap - p.i_e))
        / (1.0 + tax_share * b);

    Thresholds {
        q_star: q1,
        q_star_interior: interior(q1),
        q_star2: q2,
        q_star2_interior: interior(q2),
        p_star: p1,
        p_star_interior: interior(p1),
        p_star2: p2,
        p_star2_interior: interior(p2),
        a_star,
        a_star2,
        ca_bar,
    }
}

/// Analytic Jacobian of the open replicator field at an arbitrary point.
pub fn jacobian_at(params: &ModelParams, p: f64, q: f64) -> Matrix2 {
    let b = params.beta;
    let m = params.m;
    let gap = params.skill_gap();
    let (h1, h2) = payoff_gaps(params, p, q);

    let dh1_dp = b * (params.i_a + q * params.i_e - params.i_na) + m / (1.0 + m) * b * params.allowance;
    let dh1_dq = (1.0 - b) * params.i_e + b * p * params.i_e - b / (1.0 + m) * gap;
    let dh2_dp = -b * m * q * gap / ((1.0 + p * m) * (1.0 + p * m));
    let dh2_dq = b / (1.0 + p * m) * gap - params.c_hs;

    [
        [
            (1.0 - 2.0 * p) * h1 + p * (1.0 - p) * dh1_dp,
            p * (1.0 - p) * dh1_dq,
        ],
        [
            q * (1.0 - q) * dh2_dp,
            (1.0 - 2.0 * q) * h2 + q * (1.0 - q) * dh2_dq,
        ],
    ]
}

pub fn jacobian(params: &ModelParams, state: State) -> Result<Matrix2> {
    let s = State::new(state.p, state.q)?;
    Ok(jacobian_at(params, s.p, s.q))
}

/// Eigenvalues of a 2x2 matrix from its trace and determinant.
pub fn eigenvalues(j: &Matrix2) -> [Eigenvalue; 2] {
    let half_trace = 0.5 * (j[0][0] + j[1][1]);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    // (a - d)^2 / 4 + bc is the discriminant without the cancellation in tr^2/4 - det.
    let half_diff = 0.5 * (j[0][0] - j[1][1]);
    let disc = half_diff * half_diff + j[0][1] * j[1][0];
    if disc >= 0.0 {
        let root = disc.sqrt();
        let big = if half_trace >= 0.0 { half_trace + root } else { half_trace - root };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (lo, hi) = if big < small { (big, small) } else { (small, big) };
        [Eigenvalue::real(lo), Eigenvalue::real(hi)]
    } else {
        let im = (-disc).sqrt();
        [
            Eigenvalue { re: half_trace, im: -im },
            Eigenvalue { re: half_trace, im },
        ]
    }
}

pub fn classify(eigenvalues: &[Eigenvalue], tol: f64) -> Stability {
    if eigenvalues.iter().any(|e| e.re > tol) {
        Stability::Unstable
    } else if eigenvalues.iter().all(|e| e.re < -tol) {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

/// Derivative of the closed-economy field `q(1-q)(u_HS - u_LS)`.
pub fn closed_derivative(params: &ModelParams, q: f64) -> f64 {
    let slope = params.beta * params.skill_gap() - params.c_hs;
    (1.0 - 2.0 * q) * closed_gap(params, q) + q * (1.0 - q) * slope
}

pub fn steady_states_closed(params: &ModelParams) -> Result<Vec<SteadyState>> {
    ensure_closed_admissible(params)?;
    Ok(closed_states(params))
}

pub(crate) fn closed_states(params: &ModelParams) -> Vec<SteadyState> {
    [
        (0.0, CaseLabel::Closed0),
        (1.0, CaseLabel::Closed1),
        (q_star(params), CaseLabel::ClosedInterior),
    ]
    .into_iter()
    .map(|(q, label)| {
        let eig = vec![Eigenvalue::real(closed_derivative(params, q))];
        SteadyState {
            state: State::unchecked(0.0, q),
            case_label: label,
            in_domain: (-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&q),
            stability: classify(&eig, STABILITY_TOL),
            eigenvalues: eig,
        }
    })
    .collect()
}

/// Coefficients of `a p^2 + b p + c = 0`, whose roots are the `p`
/// coordinates of the interior steady states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn interior_quadratic(params: &ModelParams) -> InteriorQuadratic {
    let beta = params.beta;
    let m = params.m;
    let a_ = params.allowance;
    let gap = params.skill_gap();
    let w = beta / (1.0 + m);
    // Assimilation premium including the tax-refund term of the allowance.
    let premium = params.i_a - params.i_na + m / (1.0 + m) * a_;
    let deprivation_pull = w * gap - (1.0 - beta) * params.i_e;
    let closed_denominator = params.c_hs - beta * gap;
    // Net cost of assimilating at p = q = 0, i.e. -h1(0, 0).
    let net_cost = w * (params.i_ls - params.i_a) + (params.c_a - a_) - (1.0 - beta) * (params.i_a - params.i_na);

    let a = beta * m * ((1.0 - beta) * gap * params.i_e + params.c_hs * premium);
    let b = beta * (1.0 - beta) * gap * params.i_e + beta * closed_denominator * premium
        - (1.0 - beta) * m * gap * deprivation_pull
        - m * params.c_hs * net_cost;
    let c = closed_denominator * (-net_cost) - (1.0 - beta) * gap * deprivation_pull;
    InteriorQuadratic { a, b, c }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadraticRoots {
    None,
    Double(f64),
    /// Ascending.
    Two(f64, f64),
}

/// Real roots of `a x^2 + b x + c` for `a != 0`, avoiding cancellation.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> QuadraticRoots {
    let disc = b * b - 4.0 * a * c;
    if disc < -DISCRIMINANT_EPS {
        return QuadraticRoots::None;
    }
    if disc.abs() <= DISCRIMINANT_EPS {
        return QuadraticRoots::Double(-b / (2.0 * a));
    }
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    let (x1, x2) = (t / a, c / t);
    if x1 <= x2 {
        QuadraticRoots::Two(x1, x2)
    } else {
        QuadraticRoots::Two(x2, x1)
    }
}

/// High-skill share on the `u_HS = u_LS` curve for a given `p`.
pub fn skill_share_on_nullcline(params: &ModelParams, p: f64) -> f64 {
    let gap = params.skill_gap();
    (1.0 - params.beta) * gap / (params.c_hs - params.beta / (1.0 + p * params.m) * gap)
}

fn located(params: &ModelParams, state: State, label: CaseLabel) -> SteadyState {
    let eig = eigenvalues(&jacobian_at(params, state.p, state.q));
    SteadyState {
        state,
        case_label: label,
        in_domain: state.in_square(DOMAIN_SLACK),
        stability: classify(&eig, STABILITY_TOL),
        eigenvalues: eig.to_vec(),
    }
}

pub fn steady_states_open(params: &Admissible) -> Result<Vec<SteadyState>> {
    let p = params.params();
    let th = thresholds(params);
    let mut out = Vec::with_capacity(10);

    for (pp, qq, label) in [
        (0.0, 0.0, CaseLabel::A),
        (0.0, 1.0, CaseLabel::B),
        (1.0, 0.0, CaseLabel::C),
        (1.0, 1.0, CaseLabel::D),
    ] {
        out.push(located(p, State::unchecked(pp, qq), label));
    }
    if th.p_star_interior {
        out.push(located(p, State::unchecked(th.p_star, 0.0), CaseLabel::E));
    }
    if th.p_star2_interior {
        out.push(located(p, State::unchecked(th.p_star2, 1.0), CaseLabel::F));
    }
    out.push(located(p, State::unchecked(0.0, th.q_star), CaseLabel::G));
    out.push(located(p, State::unchecked(1.0, th.q_star2), CaseLabel::H));

    let quad = interior_quadratic(p);
    if !(quad.a > 0.0) {
        return Err(Error::Assumption(format!(
            "leading coefficient of the interior quadratic must be positive, got {}",
            quad.a
        )));
    }
    let roots: Vec<(f64, CaseLabel)> = match solve_quadratic(quad.a, quad.b, quad.c) {
        QuadraticRoots::None => vec![],
        QuadraticRoots::Double(x) => vec![(x, CaseLabel::I1)],
        QuadraticRoots::Two(x1, x2) => vec![(x1, CaseLabel::I1), (x2, CaseLabel::I2)],
    };
    for (root, label) in roots {
        let q = skill_share_on_nullcline(p, root);
        out.push(located(p, State::unchecked(root, q), label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Admissible {
        Admissible::new(ModelParams::example()).unwrap()
    }

    #[test]
    fn example_thresholds() {
        let th = thresholds(&example());
        assert!((th.q_star - 0.4).abs() < 1e-15);
        assert!((th.q_star2 - 22.0 / 57.0).abs() < 1e-15);
        assert!((th.a_star - 263.0 / 2200.0).abs() < 1e-15);
        assert!((th.a_star2 + 86.0 / 1425.0).abs() < 1e-15);
        assert!((th.ca_bar - 177.0 / 2200.0).abs() < 1e-15);
        assert!(!th.p_star_interior);
        assert!(th.p_star2_interior);
    }

    #[test]
    fn classify_cases() {
        let r = |a: f64, b: f64| [Eigenvalue::real(a), Eigenvalue::real(b)];
        assert_eq!(classify(&r(-1.0, -2.0), 1e-9), Stability::Stable);
        assert_eq!(classify(&r(-1.0, 0.5), 1e-9), Stability::Unstable);
        assert_eq!(classify(&r(-1.0, 1e-14), 1e-9), Stability::Marginal);
        let spiral = [Eigenvalue { re: -0.1, im: 2.0 }, Eigenvalue { re: -0.1, im: -2.0 }];
        assert_eq!(classify(&spiral, 1e-9), Stability::Stable);
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let e = eigenvalues(&[[2.0, 0.0], [0.0, -3.0]]);
        assert_eq!((e[0].re, e[1].re), (-3.0, 2.0));
        let e = eigenvalues(&[[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!((e[0].re, e[1].re), (0.0, 0.0));
        assert_eq!((e[0].im.abs(), e[1].im.abs()), (1.0, 1.0));
        // [[1, 2], [3, 4]]: (5 +- sqrt(33)) / 2
        let e = eigenvalues(&[[1.0, 2.0], [3.0, 4.0]]);
        assert!((e[0].re - (5.0 - 33f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((e[1].re - (5.0 + 33f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_roots() {
        assert_eq!(solve_quadratic(1.0, -3.0, 2.0), QuadraticRoots::Two(1.0, 2.0));
        assert_eq!(solve_quadratic(1.0, 0.0, 1.0), QuadraticRoots::None);
        assert_eq!(solve_quadratic(1.0, -2.0, 1.0), QuadraticRoots::Double(1.0));
        assert_eq!(solve_quadratic(1.0, 0.0, -4.0), QuadraticRoots::Two(-2.0, 2.0));
        // Tiny root next to a large one survives without cancellation.
        match solve_quadratic(1.0, -1e8, 1.0) {
            QuadraticRoots::Two(lo, hi) => {
                assert!((lo - 1e-8).abs() / 1e-8 < 1e-12);
                assert!((hi - 1e8).abs() / 1e8 < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example_quadratic_coefficients() {
        let quad = interior_quadratic(&ModelParams::example());
        assert!((quad.a - 0.01155).abs() < 1e-15);
        assert!((quad.b - 0.0841864).abs() < 1e-7);
        assert!((quad.c + 0.0597727).abs() < 1e-7);
    }

    #[test]
    fn corner_jacobian_is_diagonal_gaps() {
        let p = ModelParams::example();
        let j = jacobian(&p, State::new(0.0, 0.0).unwrap()).unwrap();
        let (h1, h2) = payoff_gaps(&p, 0.0, 0.0);
        assert_eq!(j, [[h1, 0.0], [0.0, h2]]);
    }

    #[test]
    fn jacobian_lower_triangular_on_no_assimilation_face() {
        let p = ModelParams::example();
        let q1 = q_star(&p);
        let j = jacobian_at(&p, 0.0, q1);
        assert_eq!(j[0][1], 0.0);
        let e = eigenvalues(&j);
        let mut diag = [j[0][0], j[1][1]];
        diag.sort_by(f64::total_cmp);
        assert!((e[0].re - diag[0]).abs() < 1e-15);
        assert!((e[1].re - diag[1]).abs() < 1e-15);
        // e1 = h1(0, q*) = A - A*, e2 = q*(1-q*)(beta*gap - c_HS)
        assert!((j[0][0] + 263.0 / 2200.0).abs() < 1e-15);
        assert!((j[1][1] - 0.24 * (0.2 - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn closed_example() {
        let states = steady_states_closed(&ModelParams::example()).unwrap();
        let stab: Vec<_> = states.iter().map(|s| (s.case_label, s.stability)).collect();
        assert_eq!(
            stab,
            vec![
                (CaseLabel::Closed0, Stability::Unstable),
                (CaseLabel::Closed1, Stability::Unstable),
                (CaseLabel::ClosedInterior, Stability::Stable)
            ]
        );
        assert!((states[2].state.q - 0.4).abs() < 1e-15);
    }

    #[test]
    fn closed_near_degenerate_cost_keeps_interior_root() {
        let p = ModelParams { c_hs: 0.4 + 1e-6, ..ModelParams::example() };
        let q1 = q_star(&p);
        assert!(q1 < 1.0 && q1 > 0.999);
        let states = steady_states_closed(&p).unwrap();
        assert_eq!(states[2].stability, Stability::Stable);
    }

    #[test]
    fn closed_derivative_matches_central_difference() {
        let p = ModelParams::example();
        let h = 1e-6;
        let fd = (crate::model::closed_field(&p, 0.4 + h) - crate::model::closed_field(&p, 0.4 - h)) / (2.0 * h);
        assert!(fd < 0.0);
        assert!((fd - closed_derivative(&p, 0.4)).abs() < 1e-9);
    }

    #[test]
    fn closed_refuses_inadmissible() {
        let p = ModelParams { c_hs: 0.3, ..ModelParams::example() };
        assert!(matches!(steady_states_closed(&p), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn example_open_enumeration() {
        let states = steady_states_open(&example()).unwrap();
        let stable: Vec<_> = states.iter().filter(|s| s.in_domain && s.is_stable()).collect();
        assert_eq!(stable.len(), 2);
        assert_eq!(stable[0].case_label, CaseLabel::G);
        assert_eq!(stable[1].case_label, CaseLabel::H);

        let saddle: Vec<_> = states
            .iter()
            .filter(|s| matches!(s.case_label, CaseLabel::I1 | CaseLabel::I2) && s.in_domain)
            .collect();
        assert_eq!(saddle.len(), 1);
        let s = saddle[0];
        assert!((s.state.p - 0.6517).abs() < 1e-4 && (s.state.q - 0.3904).abs() < 1e-4);
        assert_eq!(s.stability, Stability::Unstable);
        assert!(s.eigenvalues[0].re < 0.0 && s.eigenvalues[1].re > 0.0);
    }

    #[test]
    fn large_allowance_leaves_only_full_assimilation() {
        let params = example().with_allowance(0.15).unwrap();
        let states = steady_states_open(&params).unwrap();
        let g = states.iter().find(|s| s.case_label == CaseLabel::G).unwrap();
        let h = states.iter().find(|s| s.case_label == CaseLabel::H).unwrap();
        assert_eq!(g.stability, Stability::Unstable);
        assert_eq!(h.stability, Stability::Stable);
        assert!(!states
            .iter()
            .any(|s| matches!(s.case_label, CaseLabel::I1 | CaseLabel::I2) && s.in_domain));
        assert!(interior_quadratic(&params).c > 0.0);
    }

    #[test]
    fn boundary_allowance_puts_root_on_face() {
        let a_star = thresholds(&example()).a_star;
        let params = example().with_allowance(a_star).unwrap();
        let states = steady_states_open(&params).unwrap();
        let i2 = states.iter().find(|s| s.case_label == CaseLabel::I2).unwrap();
        assert!(i2.state.p.abs() < 1e-12);
        assert!(i2.in_domain);
        let g = states.iter().find(|s| s.case_label == CaseLabel::G).unwrap();
        assert_eq!(g.stability, Stability::Marginal);
    }
}
