use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::lower::{lower_bound, min_lower_order, LowerBoundResult};
use super::upper::{upper_bound, UpperBoundResult};
use super::{HierarchyError, HierarchyOptions, SemialgebraicSet};
use crate::measures::ReferenceMeasure;
use crate::polyring::Polynomial;

/// Both bounds at one order; failures are kept per order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t: u32,
    pub lower: Result<LowerBoundResult, HierarchyError>,
    /// `None` when no reference measure was given.
    pub upper: Option<Result<UpperBoundResult, HierarchyError>>,
}

impl SweepRow {
    pub fn rho(&self) -> Option<f64> {
        self.lower.as_ref().ok().map(|r| r.rho)
    }

    pub fn u(&self) -> Option<f64> {
        self.upper.as_ref().and_then(|u| u.as_ref().ok()).map(|u| u.u)
    }

    /// `u_t - rho_t`.
    pub fn gap(&self) -> Option<f64> {
        Some(self.u()? - self.rho()?)
    }
}

fn run_order(
    f: &Polynomial,
    set: &SemialgebraicSet,
    measure: Option<&ReferenceMeasure>,
    t: u32,
    opts: &HierarchyOptions,
) -> SweepRow {
    SweepRow {
        t,
        lower: lower_bound(f, set, t, measure, opts),
        upper: measure.map(|m| upper_bound(f, m, t)),
    }
}

/// Runs both hierarchies at each of `orders`, on up to `opts.threads`
/// workers. Rows come back in the order of `orders` regardless of scheduling.
pub fn sweep_orders(
    f: &Polynomial,
    set: &SemialgebraicSet,
    measure: Option<&ReferenceMeasure>,
    orders: &[u32],
    opts: &HierarchyOptions,
) -> Vec<SweepRow> {
    let workers = opts.threads.clamp(1, orders.len().max(1));
    if workers == 1 {
        return orders.iter().map(|&t| run_order(f, set, measure, t, opts)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; orders.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= orders.len() {
                    break;
                }
                let row = run_order(f, set, measure, orders[i], opts);
                slots.lock().expect("worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every order visited"))
        .collect()
}

/// Both hierarchies for `t = t_min..=t_max`, `t_min` the smallest valid
/// relaxation order.
pub fn sandwich_sweep(
    f: &Polynomial,
    set: &SemialgebraicSet,
    measure: &ReferenceMeasure,
    t_max: u32,
    opts: &HierarchyOptions,
) -> Vec<SweepRow> {
    let orders: Vec<u32> = (min_lower_order(f, set)..=t_max).collect();
    sweep_orders(f, set, Some(measure), &orders, opts)
}
