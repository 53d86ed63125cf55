//! C ABI over `ordinal_bayes`.
//!
//! Every fallible function returns an [`ObStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`ob_last_error_message`]. Handles are opaque and must be
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ordinal_bayes::grm::{self, GrmPosterior, GrmPrior, PrecisionConvention};
use ordinal_bayes::mrf::{self, MrfPosterior, MrfPrior};
use ordinal_bayes::survey::load_csv;
use ordinal_bayes::{Codebook, Error, ErrorKind, McmcConfig, SurveyDataset};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Data = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Variance reading of the GRM prior hyperparameter.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObConvention {
    Precision = 0,
    Variance = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObMcmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ObEdgeSummary {
    pub a: usize,
    pub b: usize,
    pub inclusion_prob: f64,
    pub bf10: f64,
    pub bf10_saturated: bool,
    pub theta_mean: f64,
    pub theta_sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// `rhat` is NaN when the run had a single chain.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ObParamSummary {
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub rhat: f64,
}

/// Opaque survey dataset.
pub struct ObDataset(SurveyDataset);

/// Opaque MRF posterior.
pub struct ObMrfPosterior(MrfPosterior);

/// Opaque GRM posterior.
pub struct ObGrmPosterior(GrmPosterior);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ObStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match (&err, err.kind()) {
            (Error::MissingFile(_) | Error::Io { .. }, _) => ObStatus::Io,
            (_, ErrorKind::Usage) => ObStatus::InvalidArgument,
            (_, ErrorKind::Data) => ObStatus::Data,
            (_, ErrorKind::Numerical) => ObStatus::Numerical,
        };
        Failure(status, err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ObStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(ObStatus::InvalidArgument, message.into())
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ObStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ObStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            ObStatus::Panic
        }
    }
}

unsafe fn utf8<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Null or empty means no names.
unsafe fn name_list(s: *const c_char, what: &str) -> Result<Vec<String>, Failure> {
    if s.is_null() {
        return Ok(Vec::new());
    }
    Ok(utf8(s, what)?
        .split(',')
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(String::from)
        .collect())
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

impl From<ObMcmcConfig> for McmcConfig {
    fn from(c: ObMcmcConfig) -> Self {
        McmcConfig {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            chains: c.chains,
            seed: c.seed,
        }
    }
}

impl From<McmcConfig> for ObMcmcConfig {
    fn from(c: McmcConfig) -> Self {
        ObMcmcConfig {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            chains: c.chains,
            seed: c.seed,
        }
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ob_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn ob_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn ob_mcmc_config_mrf_default() -> ObMcmcConfig {
    McmcConfig::mrf_default().into()
}

#[no_mangle]
pub extern "C" fn ob_mcmc_config_grm_default() -> ObMcmcConfig {
    McmcConfig::grm_default().into()
}

/// Loads a survey CSV. A null `codebook_path` selects the built-in demo
/// codebook.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ob_dataset_load(
    csv_path: *const c_char,
    codebook_path: *const c_char,
    out_dataset: *mut *mut ObDataset,
) -> ObStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        let path = utf8(csv_path, "csv_path")?;
        let codebook = if codebook_path.is_null() {
            Codebook::demo()
        } else {
            Codebook::load(utf8(codebook_path, "codebook_path")?)?
        };
        let ds = load_csv(path, &codebook)?;
        *slot = Box::into_raw(Box::new(ObDataset(ds)));
        Ok(())
    })
}

/// Keeps only rows with every item and the listed covariates present.
/// `covariates` is a comma-separated list and may be null.
///
/// # Safety
/// `dataset` must be a live handle; `out_dataset` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ob_dataset_complete_cases(
    dataset: *const ObDataset,
    covariates: *const c_char,
    out_dataset: *mut *mut ObDataset,
) -> ObStatus {
    guard(|| {
        let ds = &handle(dataset, "dataset")?.0;
        let slot = out(out_dataset, "out_dataset")?;
        let names = name_list(covariates, "covariates")?;
        let columns = names
            .iter()
            .map(|c| ds.covariate(c).map(|(_, col)| col))
            .collect::<Result<Vec<_>, _>>()?;
        let keep: Vec<usize> = (0..ds.n_rows())
            .filter(|&r| ds.row(r).iter().all(Option::is_some) && columns.iter().all(|c| !c.is_missing(r)))
            .collect();
        *slot = Box::into_raw(Box::new(ObDataset(ds.select_rows(&keep))));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ob_dataset_n_rows(dataset: *const ObDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `dataset` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ob_dataset_n_items(dataset: *const ObDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.n_items())
}

/// # Safety
/// `dataset` must come from this library and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ob_dataset_free(dataset: *mut ObDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fits the MRF over all items plus the listed covariates with the default
/// prior. Rows with missing values make this fail with `DATA`; see
/// [`ob_dataset_complete_cases`].
///
/// # Safety
/// `dataset` must be a live handle, `config` readable, `out_posterior`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ob_mrf_fit(
    dataset: *const ObDataset,
    covariates: *const c_char,
    config: *const ObMcmcConfig,
    out_posterior: *mut *mut ObMrfPosterior,
) -> ObStatus {
    guard(|| {
        let ds = &handle(dataset, "dataset")?.0;
        let config = McmcConfig::from(*handle(config, "config")?);
        let slot = out(out_posterior, "out_posterior")?;
        let data = ds.ordinal_matrix(&name_list(covariates, "covariates")?)?;
        let post = mrf::fit(&data, &MrfPrior::default(), &config)?;
        *slot = Box::into_raw(Box::new(ObMrfPosterior(post)));
        Ok(())
    })
}

/// Number of nodes (items plus covariates).
///
/// # Safety
/// `posterior` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ob_mrf_n_nodes(posterior: *const ObMrfPosterior) -> usize {
    posterior.as_ref().map_or(0, |p| p.0.p())
}

/// Name of node `i`, written NUL-terminated into `buf` of `len` bytes.
/// `out_required` (may be null) receives the length needed including the
/// terminator; a too-small buffer yields `INVALID_ARGUMENT`.
///
/// # Safety
/// `buf` must have room for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ob_mrf_node_name(
    posterior: *const ObMrfPosterior,
    i: usize,
    buf: *mut c_char,
    len: usize,
    out_required: *mut usize,
) -> ObStatus {
    guard(|| {
        let post = &handle(posterior, "posterior")?.0;
        let name = post
            .names()
            .get(i)
            .ok_or_else(|| invalid(format!("node {i} out of range")))?;
        let need = name.len() + 1;
        if let Some(r) = out_required.as_mut() {
            *r = need;
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < need {
            return Err(invalid(format!("buffer of {len} bytes, {need} needed")));
        }
        ptr::copy_nonoverlapping(name.as_ptr(), buf.cast::<u8>(), name.len());
        *buf.add(name.len()) = 0;
        Ok(())
    })
}

/// Summary of the edge between nodes `i` and `j` (order irrelevant).
///
/// # Safety
/// `posterior` must be a live handle, `out_edge` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_mrf_edge(
    posterior: *const ObMrfPosterior,
    i: usize,
    j: usize,
    out_edge: *mut ObEdgeSummary,
) -> ObStatus {
    guard(|| {
        let post = &handle(posterior, "posterior")?.0;
        let slot = out(out_edge, "out_edge")?;
        if i == j || i >= post.p() || j >= post.p() {
            return Err(invalid(format!("no edge ({i}, {j}) among {} nodes", post.p())));
        }
        let e = post.edge(i, j);
        *slot = ObEdgeSummary {
            a: e.a,
            b: e.b,
            inclusion_prob: e.inclusion_prob,
            bf10: e.bf10,
            bf10_saturated: e.bf10_saturated,
            theta_mean: e.theta_mean,
            theta_sd: e.theta_sd,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
        };
        Ok(())
    })
}

/// Row-major p x p matrix of posterior inclusion probabilities (zero
/// diagonal). `len` must be at least p * p.
///
/// # Safety
/// `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ob_mrf_inclusion_matrix(
    posterior: *const ObMrfPosterior,
    buf: *mut f64,
    len: usize,
) -> ObStatus {
    guard(|| {
        let post = &handle(posterior, "posterior")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = post.p() * post.p();
        if len < need {
            return Err(invalid(format!("buffer of {len} doubles, {need} needed")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, v) in dst.iter_mut().zip(post.inclusion_matrix().into_iter().flatten()) {
            *d = v;
        }
        Ok(())
    })
}

/// # Safety
/// `posterior` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ob_mrf_posterior_free(posterior: *mut ObMrfPosterior) {
    if !posterior.is_null() {
        drop(Box::from_raw(posterior));
    }
}

/// Fits the GRM on all items with the listed covariates. `hyperparameter`
/// is read according to `convention`.
///
/// # Safety
/// `dataset` must be a live handle, `config` readable, `out_posterior`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_fit(
    dataset: *const ObDataset,
    covariates: *const c_char,
    config: *const ObMcmcConfig,
    hyperparameter: f64,
    convention: ObConvention,
    out_posterior: *mut *mut ObGrmPosterior,
) -> ObStatus {
    guard(|| {
        let ds = &handle(dataset, "dataset")?.0;
        let config = McmcConfig::from(*handle(config, "config")?);
        let slot = out(out_posterior, "out_posterior")?;
        let names = name_list(covariates, "covariates")?;
        let convention = match convention {
            ObConvention::Precision => PrecisionConvention::Precision,
            ObConvention::Variance => PrecisionConvention::Variance,
        };
        let prior = GrmPrior::from_hyperparameter(hyperparameter, convention);
        let post = grm::fit(&ds.item_matrix()?, &ds.covariate_design(&names)?, &prior, &config)?;
        *slot = Box::into_raw(Box::new(ObGrmPosterior(post)));
        Ok(())
    })
}

/// # Safety
/// `posterior` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_n_respondents(posterior: *const ObGrmPosterior) -> usize {
    posterior.as_ref().map_or(0, |p| p.0.n_respondents())
}

/// Summary of a named parameter such as `theta[3]`, `gamma[DrE]`,
/// `beta[DrE]`, `delta[2]` or `alpha[G]`.
///
/// # Safety
/// `name` must be NUL-terminated, `out_summary` writable.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_param(
    posterior: *const ObGrmPosterior,
    name: *const c_char,
    out_summary: *mut ObParamSummary,
) -> ObStatus {
    guard(|| {
        let post = &handle(posterior, "posterior")?.0;
        let slot = out(out_summary, "out_summary")?;
        let name = utf8(name, "name")?;
        let s = post
            .summary(name)
            .ok_or_else(|| invalid(format!("no parameter named {name}")))?;
        *slot = ObParamSummary {
            mean: s.mean,
            sd: s.sd,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            rhat: s.rhat.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Posterior means of the latent traits, one per respondent.
///
/// # Safety
/// `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_theta_means(posterior: *const ObGrmPosterior, buf: *mut f64, len: usize) -> ObStatus {
    guard(|| {
        let post = &handle(posterior, "posterior")?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = post.n_respondents();
        if len < need {
            return Err(invalid(format!("buffer of {len} doubles, {need} needed")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, s) in dst.iter_mut().zip(post.of_kind(grm::ParamKind::Theta)) {
            *d = s.mean;
        }
        Ok(())
    })
}

/// Largest R-hat over all parameters; NaN for a single chain.
///
/// # Safety
/// `out_rhat` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_max_rhat(posterior: *const ObGrmPosterior, out_rhat: *mut f64) -> ObStatus {
    guard(|| {
        let post = &handle(posterior, "posterior")?.0;
        *out(out_rhat, "out_rhat")? = post.max_rhat().unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `posterior` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_posterior_free(posterior: *mut ObGrmPosterior) {
    if !posterior.is_null() {
        drop(Box::from_raw(posterior));
    }
}

/// Gelman-Rubin R-hat of `n_chains` chains of `n_draws` each, stored
/// chain after chain.
///
/// # Safety
/// `draws` must point to `n_chains * n_draws` doubles.
#[no_mangle]
pub unsafe extern "C" fn ob_gelman_rubin(
    draws: *const f64,
    n_chains: usize,
    n_draws: usize,
    out_rhat: *mut f64,
) -> ObStatus {
    guard(|| {
        if draws.is_null() {
            return Err(null("draws"));
        }
        let slot = out(out_rhat, "out_rhat")?;
        let total = n_chains
            .checked_mul(n_draws)
            .ok_or_else(|| invalid("chain dimensions overflow"))?;
        let all = std::slice::from_raw_parts(draws, total);
        let chains: Vec<&[f64]> = if n_draws == 0 {
            vec![&[][..]; n_chains]
        } else {
            all.chunks(n_draws).collect()
        };
        *slot = grm::gelman_rubin(&chains)?;
        Ok(())
    })
}

/// Inclusion Bayes factor from posterior and prior inclusion probabilities.
///
/// # Safety
/// `out_bf10` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ob_inclusion_bf10(posterior: f64, prior: f64, out_bf10: *mut f64) -> ObStatus {
    guard(|| {
        *out(out_bf10, "out_bf10")? = mrf::inclusion_bf10(posterior, prior)?;
        Ok(())
    })
}

/// GRM probability of category `h` (1-based) given `n_delta` category
/// offsets, the first of which must be zero.
///
/// # Safety
/// `delta` must point to `n_delta` doubles.
#[no_mangle]
pub unsafe extern "C" fn ob_grm_category_prob(
    theta: f64,
    gamma: f64,
    beta: f64,
    delta: *const f64,
    n_delta: usize,
    h: usize,
    out_prob: *mut f64,
) -> ObStatus {
    guard(|| {
        if delta.is_null() {
            return Err(null("delta"));
        }
        let slot = out(out_prob, "out_prob")?;
        let delta = std::slice::from_raw_parts(delta, n_delta);
        *slot = grm::category_prob(theta, gamma, beta, delta, h)?;
        Ok(())
    })
}
