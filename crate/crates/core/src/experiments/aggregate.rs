//! Root-sum-square assembly of per-mode records into norms of the full
//! non-zero-mode field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::FunctionalRecord;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateRecord<T> {
    pub t: T,
    pub l2: T,
    pub weighted: T,
    pub hminus1: T,
    pub h1: T,
    pub j_l2: T,
    pub j_weighted: T,
    pub phi: T,
    pub jj: T,
    pub lyap: T,
    pub batchelor: T,
}

/// Norms combine as `√Σ n²`, functionals add. All modes must share sample times.
pub fn aggregate_modes<T: Real>(modes: &[&[FunctionalRecord<T>]]) -> Result<Vec<AggregateRecord<T>>> {
    let Some(first) = modes.first() else {
        return Ok(Vec::new());
    };
    for (m, recs) in modes.iter().enumerate() {
        if recs.len() != first.len() {
            return Err(Error::MismatchedGrids(format!(
                "mode {m} has {} samples, mode 0 has {}",
                recs.len(),
                first.len()
            )));
        }
        for (a, b) in recs.iter().zip(first.iter()) {
            let tol = T::of(1e-12) * (T::one() + b.t.abs());
            if (a.t - b.t).abs() > tol {
                return Err(Error::MismatchedGrids(format!(
                    "mode {m} samples t = {} where mode 0 has t = {}",
                    a.t, b.t
                )));
            }
        }
    }
    let rss = |i: usize, f: fn(&FunctionalRecord<T>) -> T| {
        modes
            .iter()
            .fold(T::zero(), |acc, recs| acc + f(&recs[i]).powi(2))
            .sqrt()
    };
    let sum = |i: usize, f: fn(&FunctionalRecord<T>) -> T| {
        modes.iter().fold(T::zero(), |acc, recs| acc + f(&recs[i]))
    };
    Ok((0..first.len())
        .map(|i| {
            let l2 = rss(i, |r| r.l2);
            let hminus1 = rss(i, |r| r.hminus1);
            AggregateRecord {
                t: first[i].t,
                l2,
                weighted: rss(i, |r| r.weighted),
                hminus1,
                h1: rss(i, |r| r.h1),
                j_l2: rss(i, |r| r.j_l2),
                j_weighted: rss(i, |r| r.j_weighted),
                phi: sum(i, |r| r.phi),
                jj: sum(i, |r| r.jj),
                lyap: sum(i, |r| r.lyap),
                batchelor: if l2 > T::zero() { hminus1 / l2 } else { T::zero() },
            }
        })
        .collect())
}
