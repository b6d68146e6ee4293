//! C ABI over the cbet core: count stores, environments, reward mixing and
//! the policy combiner.
//!
//! Every fallible function returns a [`CbetStatus`]; on failure the message
//! is kept per thread and can be read with [`cbet_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cbet::gridworld::{make_env, Action, EnvKind, Environment, Observation};
use cbet::novelty::{compute_change, hash_observation, ChangeKey, CountStore, RewardMix, StateKey};
use cbet::rng::{stream, Stream};
use cbet::transfer::combine_logits;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Call made in the wrong state, e.g. stepping a finished episode.
    Usage = 3,
    /// A panic was caught at the boundary.
    Internal = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbetEnvKind {
    Doorkey = 0,
    Unlock = 1,
    Craftworld = 2,
}

/// Result of one environment step, with the novelty keys of the transition.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CbetStep {
    pub reward: f64,
    pub done: bool,
    pub success: bool,
    pub state_key: u64,
    pub change_key: u64,
}

/// Opaque pseudocount tables.
pub struct CbetCountStore {
    inner: CountStore,
}

/// Opaque environment with its last observation.
pub struct CbetEnv {
    env: Environment,
    last: Option<Observation>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: CbetStatus, msg: impl Into<String>) -> CbetStatus {
    set_error(msg);
    status
}

fn status_of(err: &cbet::Error) -> CbetStatus {
    match err {
        cbet::Error::Config(_) => CbetStatus::InvalidArgument,
        _ => CbetStatus::Usage,
    }
}

fn guard(body: impl FnOnce() -> CbetStatus) -> CbetStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => fail(CbetStatus::Internal, "panic inside cbet"),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cbet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated) and returns the message length without the terminator. A
/// return value `>= len` means the message was truncated. Returns 0 when
/// there is no message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cbet_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a count store. `reset_probability` must not exceed
/// `1 - gamma_i`; resets draw from a stream derived from `seed`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_count_store_new(
    gamma_i: f64,
    reset_probability: f64,
    seed: u64,
    out: *mut *mut CbetCountStore,
) -> CbetStatus {
    guard(|| {
        if out.is_null() {
            return fail(CbetStatus::NullPointer, "out is null");
        }
        match CountStore::new(gamma_i, reset_probability, stream(seed, Stream::CountReset, 0)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CbetCountStore { inner }));
                CbetStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `store` must be null or a handle from [`cbet_count_store_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cbet_count_store_free(store: *mut CbetCountStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Counts one visit of `(state_key, change_key)` and writes the intrinsic
/// reward `1 / (n(s) + n(c))`.
///
/// # Safety
/// `store` must be a live handle and `reward` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_count_store_observe(
    store: *mut CbetCountStore,
    state_key: u64,
    change_key: u64,
    reward: *mut f64,
) -> CbetStatus {
    guard(|| {
        let (Some(s), false) = (store.as_mut(), reward.is_null()) else {
            return fail(CbetStatus::NullPointer, "store or reward is null");
        };
        *reward = s.inner.observe_and_reward(StateKey(state_key), ChangeKey(change_key));
        CbetStatus::Ok
    })
}

/// Draws the per-step reset; `*reset` is set when both tables were cleared.
///
/// # Safety
/// `store` must be a live handle and `reset` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_count_store_maybe_reset(store: *mut CbetCountStore, reset: *mut bool) -> CbetStatus {
    guard(|| {
        let (Some(s), false) = (store.as_mut(), reset.is_null()) else {
            return fail(CbetStatus::NullPointer, "store or reset is null");
        };
        *reset = s.inner.maybe_reset();
        CbetStatus::Ok
    })
}

/// Current counts of one state key and one change key.
///
/// # Safety
/// `store` must be a live handle; `state_count` and `change_count` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cbet_count_store_counts(
    store: *const CbetCountStore,
    state_key: u64,
    change_key: u64,
    state_count: *mut u64,
    change_count: *mut u64,
) -> CbetStatus {
    guard(|| {
        let Some(s) = store.as_ref() else {
            return fail(CbetStatus::NullPointer, "store is null");
        };
        if state_count.is_null() || change_count.is_null() {
            return fail(CbetStatus::NullPointer, "count output is null");
        }
        *state_count = s.inner.state_count(StateKey(state_key));
        *change_count = s.inner.change_count(ChangeKey(change_key));
        CbetStatus::Ok
    })
}

/// `r_e + alpha * r_i`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_mix(r_e: f64, r_i: f64, alpha: f64, out: *mut f64) -> CbetStatus {
    guard(|| {
        if out.is_null() {
            return fail(CbetStatus::NullPointer, "out is null");
        }
        match RewardMix::new(alpha) {
            Ok(m) => {
                *out = m.mix(r_e, r_i);
                CbetStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Writes `softmax(scale * (intrinsic + extrinsic))` over `n` actions to `out`.
///
/// # Safety
/// `intrinsic`, `extrinsic` and `out` must each point to `n` valid `f64`s.
#[no_mangle]
pub unsafe extern "C" fn cbet_combine_logits(
    intrinsic: *const f64,
    extrinsic: *const f64,
    n: usize,
    scale: f64,
    out: *mut f64,
) -> CbetStatus {
    guard(|| {
        if intrinsic.is_null() || extrinsic.is_null() || out.is_null() {
            return fail(CbetStatus::NullPointer, "logit buffer is null");
        }
        if n == 0 || !(scale > 0.0 && scale.is_finite()) {
            return fail(CbetStatus::InvalidArgument, "need n > 0 and a positive finite scale");
        }
        let i = std::slice::from_raw_parts(intrinsic, n);
        let e = std::slice::from_raw_parts(extrinsic, n);
        match combine_logits(i, e, scale) {
            Ok(p) => {
                std::slice::from_raw_parts_mut(out, n).copy_from_slice(&p);
                CbetStatus::Ok
            }
            Err(err) => fail(status_of(&err), err.to_string()),
        }
    })
}

fn env_kind(kind: i32) -> Option<EnvKind> {
    match kind {
        0 => Some(EnvKind::Doorkey),
        1 => Some(EnvKind::Unlock),
        2 => Some(EnvKind::Craftworld),
        _ => None,
    }
}

/// Creates an environment. `kind` takes the values of `CbetEnvKind`;
/// other values are rejected.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_env_new(kind: i32, layout_seed: u64, fixed_layout: bool, out: *mut *mut CbetEnv) -> CbetStatus {
    guard(|| {
        if out.is_null() {
            return fail(CbetStatus::NullPointer, "out is null");
        }
        let Some(kind) = env_kind(kind) else {
            return fail(CbetStatus::InvalidArgument, format!("unknown environment kind {kind}"));
        };
        *out = Box::into_raw(Box::new(CbetEnv {
            env: make_env(kind, layout_seed, fixed_layout),
            last: None,
        }));
        CbetStatus::Ok
    })
}

/// # Safety
/// `env` must be null or a handle from [`cbet_env_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cbet_env_free(env: *mut CbetEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Starts an episode and writes the initial observation's state key.
///
/// # Safety
/// `env` must be a live handle and `state_key` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_env_reset(env: *mut CbetEnv, episode_seed: u64, state_key: *mut u64) -> CbetStatus {
    guard(|| {
        let (Some(h), false) = (env.as_mut(), state_key.is_null()) else {
            return fail(CbetStatus::NullPointer, "env or state_key is null");
        };
        let obs = h.env.reset(episode_seed);
        *state_key = hash_observation(&obs).0;
        h.last = Some(obs);
        CbetStatus::Ok
    })
}

/// Applies action `action` (0 turn left, 1 turn right, 2 forward, 3 pickup,
/// 4 toggle, 5 craft, 6 noop).
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cbet_env_step(env: *mut CbetEnv, action: u32, out: *mut CbetStep) -> CbetStatus {
    guard(|| {
        let (Some(h), false) = (env.as_mut(), out.is_null()) else {
            return fail(CbetStatus::NullPointer, "env or out is null");
        };
        let Some(action) = Action::from_index(action as usize) else {
            return fail(CbetStatus::InvalidArgument, format!("unknown action {action}"));
        };
        let Some(prev) = h.last.as_ref() else {
            return fail(CbetStatus::Usage, "environment stepped before reset");
        };
        let step = match h.env.step(action) {
            Ok(s) => s,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let change = match compute_change(prev, &step.observation) {
            Ok(c) => c,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        *out = CbetStep {
            reward: step.extrinsic_reward,
            done: step.done,
            success: step.info.success,
            state_key: hash_observation(&step.observation).0,
            change_key: change.0,
        };
        h.last = Some(step.observation);
        CbetStatus::Ok
    })
}
