//! C interface to the assimdyn model.
//!
//! Every fallible function returns an [`AdStatus`]; on failure a message is
//! available from [`ad_last_error`] on the same thread. Models are opaque
//! handles created by `ad_model_new` or `ad_model_from_json` and released
//! with `ad_model_free`. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use assimdyn::dynamics::integrate;
use assimdyn::equilibria::{
    closed_derivative, jacobian, steady_states_closed, steady_states_open, thresholds, CaseLabel, Stability,
    SteadyState,
};
use assimdyn::model::{rhs_closed, rhs_open};
use assimdyn::params::{load_params, validate, validate_closed};
use assimdyn::welfare::{policy_verdict, PolicyStatus};
use assimdyn::{Admissible, Error, ModelParams, State};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdStatus {
    Ok = 0,
    NullPointer = 1,
    /// The parameter document could not be parsed.
    Parse = 2,
    /// The parameters fail an admissibility check.
    Inadmissible = 3,
    /// An argument lies outside its domain.
    Domain = 4,
    NonFinite = 5,
    /// A model assumption failed during evaluation.
    Assumption = 6,
    /// The requested integration exceeds the step budget.
    Budget = 7,
    /// Index past the end of a list.
    Index = 8,
    /// An internal panic was caught.
    Panic = 9,
}

/// Origin of a steady state. `A`..`I2` are open-economy cases; the `CLOSED`
/// variants are the natives-only states at `q = 0`, `q = 1` and `q = q*`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdCase {
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
    Closed0,
    Closed1,
    ClosedInterior,
    /// No steady state, e.g. an integration that did not settle.
    None,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdStability {
    Stable,
    Unstable,
    Marginal,
}

/// Economic parameters. `n` scales welfare only; `allowance` is `A`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdParams {
    pub i_hs: f64,
    pub i_ls: f64,
    pub i_a: f64,
    pub i_na: f64,
    pub i_e: f64,
    pub c_hs: f64,
    pub c_a: f64,
    pub beta: f64,
    pub m: f64,
    pub n: f64,
    pub allowance: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdThresholds {
    pub q_star: f64,
    pub q_star2: f64,
    pub p_star: f64,
    pub p_star2: f64,
    pub a_star: f64,
    pub a_star2: f64,
    pub ca_bar: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdSteadyState {
    pub p: f64,
    pub q: f64,
    pub case_label: AdCase,
    pub in_domain: bool,
    pub stability: AdStability,
    /// Number of valid entries in `eig_re` and `eig_im` (1 or 2).
    pub eig_count: usize,
    pub eig_re: [f64; 2],
    pub eig_im: [f64; 2],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdTerminal {
    pub p: f64,
    pub q: f64,
    pub steps: u64,
    /// Steady state the trajectory settled at, or `AD_CASE_NONE`.
    pub converged_to: AdCase,
    pub max_clamp: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdWelfare {
    /// False when `A* <= 0` and no allowance is needed; the policy fields
    /// are then NaN and the flags false.
    pub evaluated: bool,
    pub sw_natives_baseline: f64,
    pub sw_migrants_baseline: f64,
    pub sw_natives_policy: f64,
    pub sw_migrants_policy: f64,
    pub ca_threshold_rhs: f64,
    pub natives_better_off: bool,
    pub migrants_better_off: bool,
    pub cost_condition_holds: bool,
}

/// Opaque model handle: parameters that passed validation or were forced.
pub struct AdModel {
    inner: Admissible,
}

/// Opaque list of steady states.
pub struct AdSteadyStates {
    items: Vec<AdSteadyState>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> AdStatus {
    match err {
        Error::Parse(_) => AdStatus::Parse,
        Error::NonFinite(_) => AdStatus::NonFinite,
        Error::Inadmissible(_) => AdStatus::Inadmissible,
        Error::Domain { .. } => AdStatus::Domain,
        Error::Budget { .. } => AdStatus::Budget,
        Error::Assumption(_) | Error::SamplerExhausted(_) => AdStatus::Assumption,
        Error::Io(_) => AdStatus::Parse,
    }
}

struct Failure(AdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AdStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, records any failure and converts panics into `AD_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            AdStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

impl From<&AdParams> for ModelParams {
    fn from(p: &AdParams) -> Self {
        ModelParams {
            i_hs: p.i_hs,
            i_ls: p.i_ls,
            i_a: p.i_a,
            i_na: p.i_na,
            i_e: p.i_e,
            c_hs: p.c_hs,
            c_a: p.c_a,
            beta: p.beta,
            m: p.m,
            n: p.n,
            allowance: p.allowance,
        }
    }
}

impl From<&ModelParams> for AdParams {
    fn from(p: &ModelParams) -> Self {
        AdParams {
            i_hs: p.i_hs,
            i_ls: p.i_ls,
            i_a: p.i_a,
            i_na: p.i_na,
            i_e: p.i_e,
            c_hs: p.c_hs,
            c_a: p.c_a,
            beta: p.beta,
            m: p.m,
            n: p.n,
            allowance: p.allowance,
        }
    }
}

fn case_of(label: CaseLabel) -> AdCase {
    match label {
        CaseLabel::A => AdCase::A,
        CaseLabel::B => AdCase::B,
        CaseLabel::C => AdCase::C,
        CaseLabel::D => AdCase::D,
        CaseLabel::E => AdCase::E,
        CaseLabel::F => AdCase::F,
        CaseLabel::G => AdCase::G,
        CaseLabel::H => AdCase::H,
        CaseLabel::I1 => AdCase::I1,
        CaseLabel::I2 => AdCase::I2,
        CaseLabel::Closed0 => AdCase::Closed0,
        CaseLabel::Closed1 => AdCase::Closed1,
        CaseLabel::ClosedInterior => AdCase::ClosedInterior,
    }
}

fn stability_of(s: Stability) -> AdStability {
    match s {
        Stability::Stable => AdStability::Stable,
        Stability::Unstable => AdStability::Unstable,
        Stability::Marginal => AdStability::Marginal,
    }
}

fn flatten(s: &SteadyState) -> AdSteadyState {
    let mut eig_re = [f64::NAN; 2];
    let mut eig_im = [f64::NAN; 2];
    for (k, e) in s.eigenvalues.iter().take(2).enumerate() {
        eig_re[k] = e.re;
        eig_im[k] = e.im;
    }
    AdSteadyState {
        p: s.state.p,
        q: s.state.q,
        case_label: case_of(s.case_label),
        in_domain: s.in_domain,
        stability: stability_of(s.stability),
        eig_count: s.eigenvalues.len().min(2),
        eig_re,
        eig_im,
    }
}

fn admit(params: ModelParams, force: bool) -> Result<Admissible, Error> {
    match Admissible::new(params) {
        Err(Error::Inadmissible(_)) if force => Admissible::force(params),
        other => other,
    }
}

fn into_handle(model: Admissible, out: &mut *mut AdModel) {
    *out = Box::into_raw(Box::new(AdModel { inner: model }));
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parameters of the built-in worked example.
#[no_mangle]
pub extern "C" fn ad_params_example() -> AdParams {
    AdParams::from(&ModelParams::example())
}

/// Validates `params` and creates a model. With `force`, parameters that
/// fail validation are accepted anyway; results are then unsupported.
///
/// # Safety
/// `params` must point to a valid `AdParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_model_new(params: *const AdParams, force: bool, out: *mut *mut AdModel) -> AdStatus {
    guard(|| {
        let params = ModelParams::from(as_ref(params, "params")?);
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        into_handle(admit(params, force)?, out);
        Ok(())
    })
}

/// Parses a JSON parameter document and creates a model.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_model_from_json(json: *const c_char, force: bool, out: *mut *mut AdModel) -> AdStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(AdStatus::Parse, format!("document is not UTF-8: {e}")))?;
        let params = load_params(text).map_err(Error::from)?;
        into_handle(admit(params, force)?, out);
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from `ad_model_new`/`ad_model_from_json` and not have
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn ad_model_free(model: *mut AdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_model_params(model: *const AdModel, out: *mut AdParams) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        *as_mut(out, "out")? = AdParams::from(model.inner.params());
        Ok(())
    })
}

/// Whether the model bypassed validation.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ad_model_is_forced(model: *const AdModel) -> bool {
    model.as_ref().is_some_and(|m| m.inner.is_forced())
}

/// Changes the allowance `A`, re-validating. On failure the model is left
/// unchanged.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ad_model_set_allowance(model: *mut AdModel, allowance: f64) -> AdStatus {
    guard(|| {
        let model = as_mut(model, "model")?;
        model.inner = model.inner.with_allowance(allowance)?;
        Ok(())
    })
}

/// Runs every admissibility check. `passed` receives the overall verdict and
/// `failed`, when not null, the number of failed checks.
///
/// # Safety
/// `params` must point to a valid `AdParams`; `passed` must be writable;
/// `failed` may be null.
#[no_mangle]
pub unsafe extern "C" fn ad_validate(
    params: *const AdParams,
    closed: bool,
    passed: *mut bool,
    failed: *mut usize,
) -> AdStatus {
    guard(|| {
        let params = ModelParams::from(as_ref(params, "params")?);
        let passed = as_mut(passed, "passed")?;
        let report = if closed { validate_closed(&params)? } else { validate(&params)? };
        *passed = report.overall;
        if let Some(failed) = failed.as_mut() {
            *failed = report.failed_names().len();
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_thresholds(model: *const AdModel, out: *mut AdThresholds) -> AdStatus {
    guard(|| {
        let th = thresholds(&as_ref(model, "model")?.inner);
        *as_mut(out, "out")? = AdThresholds {
            q_star: th.q_star,
            q_star2: th.q_star2,
            p_star: th.p_star,
            p_star2: th.p_star2,
            a_star: th.a_star,
            a_star2: th.a_star2,
            ca_bar: th.ca_bar,
        };
        Ok(())
    })
}

/// Replicator right-hand side of the open economy at `(p, q)`.
///
/// # Safety
/// `model` must be a live handle; `dp` and `dq` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_rhs_open(model: *const AdModel, p: f64, q: f64, dp: *mut f64, dq: *mut f64) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        let (dp, dq) = (as_mut(dp, "dp")?, as_mut(dq, "dq")?);
        (*dp, *dq) = rhs_open(model.inner.params(), State::unchecked(p, q))?;
        Ok(())
    })
}

/// Right-hand side of the natives-only economy at `q`.
///
/// # Safety
/// `model` must be a live handle; `dq` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_rhs_closed(model: *const AdModel, q: f64, dq: *mut f64) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        *as_mut(dq, "dq")? = rhs_closed(model.inner.params(), q)?;
        Ok(())
    })
}

/// Analytic Jacobian of the open system at `(p, q)`, row-major into
/// `out[0..4]`: `d(dp)/dp, d(dp)/dq, d(dq)/dp, d(dq)/dq`.
///
/// # Safety
/// `model` must be a live handle; `out` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn ad_jacobian(model: *const AdModel, p: f64, q: f64, out: *mut f64) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let j = jacobian(model.inner.params(), State::unchecked(p, q))?;
        let out = std::slice::from_raw_parts_mut(out, 4);
        out.copy_from_slice(&[j[0][0], j[0][1], j[1][0], j[1][1]]);
        Ok(())
    })
}

/// Derivative of the natives-only right-hand side at `q`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_closed_derivative(model: *const AdModel, q: f64, out: *mut f64) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        let q = State::new(0.0, q)?.q;
        *as_mut(out, "out")? = closed_derivative(model.inner.params(), q);
        Ok(())
    })
}

/// Enumerates the steady states of the open economy, or of the natives-only
/// economy when `closed` is set. Release the list with
/// `ad_steady_states_free`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_steady_states(
    model: *const AdModel,
    closed: bool,
    out: *mut *mut AdSteadyStates,
) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let states = if closed {
            steady_states_closed(model.inner.params())?
        } else {
            steady_states_open(&model.inner)?
        };
        let items = states.iter().map(flatten).collect();
        *out = Box::into_raw(Box::new(AdSteadyStates { items }));
        Ok(())
    })
}

/// Number of entries; 0 for null.
///
/// # Safety
/// `list` must be a live list or null.
#[no_mangle]
pub unsafe extern "C" fn ad_steady_states_len(list: *const AdSteadyStates) -> usize {
    list.as_ref().map_or(0, |l| l.items.len())
}

/// # Safety
/// `list` must be a live list; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_steady_states_get(
    list: *const AdSteadyStates,
    index: usize,
    out: *mut AdSteadyState,
) -> AdStatus {
    guard(|| {
        let list = as_ref(list, "list")?;
        let item = list
            .items
            .get(index)
            .ok_or_else(|| Failure(AdStatus::Index, format!("index {index} out of {}", list.items.len())))?;
        *as_mut(out, "out")? = *item;
        Ok(())
    })
}

/// # Safety
/// `list` must come from `ad_steady_states` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ad_steady_states_free(list: *mut AdSteadyStates) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Integrates the open system with fixed-step RK4 and reports where the
/// trajectory ends.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_integrate(
    model: *const AdModel,
    p0: f64,
    q0: f64,
    t_max: f64,
    dt: f64,
    out: *mut AdTerminal,
) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        let out = as_mut(out, "out")?;
        let traj = integrate(&model.inner, State::new(p0, q0)?, t_max, dt)?;
        *out = AdTerminal {
            p: traj.terminal.p,
            q: traj.terminal.q,
            steps: traj.steps,
            converged_to: traj.converged_to.map_or(AdCase::None, |s| case_of(s.case_label)),
            max_clamp: traj.max_clamp,
        };
        Ok(())
    })
}

/// Welfare at no assimilation without allowance against full assimilation
/// with the minimal allowance `A*`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ad_policy_verdict(model: *const AdModel, out: *mut AdWelfare) -> AdStatus {
    guard(|| {
        let model = as_ref(model, "model")?;
        let out = as_mut(out, "out")?;
        let r = policy_verdict(&model.inner)?;
        *out = AdWelfare {
            evaluated: r.status == PolicyStatus::Evaluated,
            sw_natives_baseline: r.sw_natives_baseline,
            sw_migrants_baseline: r.sw_migrants_baseline,
            sw_natives_policy: r.sw_natives_policy.unwrap_or(f64::NAN),
            sw_migrants_policy: r.sw_migrants_policy.unwrap_or(f64::NAN),
            ca_threshold_rhs: r.ca_threshold_rhs.unwrap_or(f64::NAN),
            natives_better_off: r.natives_better_off.unwrap_or(false),
            migrants_better_off: r.migrants_better_off.unwrap_or(false),
            cost_condition_holds: r.cost_condition_holds.unwrap_or(false),
        };
        Ok(())
    })
}
