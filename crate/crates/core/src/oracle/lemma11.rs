//! Exhaustive check of the four level-set implications relating the trees
//! rooted at `(s, v)` and `(s, v + P)` for `v > cT`, under a bundle with a
//! small `b`.
//!
//! With `≡` meaning equivalence modulo `(T̆, P̆)`:
//!
//! - 1a, `ℓ ∉ core(v)`: each `(e,u)` at level `ℓ` has an `(e,u′)`, `u ≡ u′`,
//!   at level `ℓ − P`.
//! - 1b, `ℓ ∉ core(v)`: each `(e,u)` at level `ℓ − P` has an `(e,ũ)` at `ℓ`.
//! - 2a, `ℓ ∈ core(v)`: each `(e,u)` at level `shift(ℓ)` of the tree at
//!   `v + P` has an `(e,u′)` at level `ℓ` of the tree at `v`.
//! - 2b, `ℓ ∈ core(v)`: the converse of 2a.
//!
//! When an implication fails, the path reaching the unmatched configuration
//! is compressed into a path scheme and its cycle repetitions per slope are
//! reported next to the `b⁴·P` threshold they are expected to exceed.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::Serialize;

use crate::lps::{analyze_cycle_repetitions, compress_path};
use crate::oca::{Configuration, Guard, Oca};
use crate::periodicity::{ConstantBundle, PeriodicityError};
use crate::upset::tp_equivalent;

/// Which roots and levels are examined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LemmaSamples {
    /// Roots are `v = v₀ + offset`, `v₀` the least admissible counter.
    pub v_offsets: Vec<u64>,
    /// Levels `ℓ <= maxLevel` of the tree at `v`.
    pub max_level: u64,
    /// Failures kept with a full diagnostic.
    pub max_details: usize,
}

impl Default for LemmaSamples {
    fn default() -> Self {
        LemmaSamples { v_offsets: vec![0, 1, 2, 3, 5, 8], max_level: 40, max_details: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Implication {
    #[serde(rename = "1a")]
    OutsideDown,
    #[serde(rename = "1b")]
    OutsideUp,
    #[serde(rename = "2a")]
    CoreBack,
    #[serde(rename = "2b")]
    CoreForward,
}

impl Implication {
    pub const ALL: [Implication; 4] =
        [Implication::OutsideDown, Implication::OutsideUp, Implication::CoreBack, Implication::CoreForward];

    pub fn label(self) -> &'static str {
        match self {
            Implication::OutsideDown => "1a",
            Implication::OutsideUp => "1b",
            Implication::CoreBack => "2a",
            Implication::CoreForward => "2b",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TallyRow {
    pub implication: Implication,
    /// Segment of `ℓ`; outside the core, the segment whose interval precedes
    /// `ℓ`.
    pub segment: usize,
    #[serde(flatten)]
    pub tally: Tally,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub cycle_repetitions: BTreeMap<String, u64>,
    /// `b⁴·P`.
    pub repetition_threshold: u64,
    pub scheme_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Failure {
    pub implication: Implication,
    pub root: String,
    pub level: u64,
    /// Level searched for a match.
    pub other_level: u64,
    pub segment: usize,
    pub unmatched: String,
    pub diagnostic: Option<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Lemma11Report {
    pub b: u64,
    pub p: u64,
    pub prev_t: u64,
    pub prev_p: u64,
    pub seg_threshold: u64,
    pub counter_threshold: u64,
    pub segments: usize,
    pub roots: Vec<String>,
    pub tallies: Vec<TallyRow>,
    pub failures: Vec<Failure>,
    /// `shift` from the index map and from the closed form disagreed.
    pub shift_mismatches: u64,
    pub note: String,
}

impl Lemma11Report {
    /// Failures on segment `seg`, over all four implications.
    pub fn failures_in_segment(&self, seg: usize) -> u64 {
        self.tallies.iter().filter(|r| r.segment == seg).map(|r| r.tally.fail).sum()
    }

    pub fn total(&self, imp: Implication) -> Tally {
        let mut t = Tally::default();
        for r in self.tallies.iter().filter(|r| r.implication == imp) {
            t.pass += r.tally.pass;
            t.fail += r.tally.fail;
            t.skipped += r.tally.skipped;
        }
        t
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Lemma11Error {
    #[error(transparent)]
    Periodicity(#[from] PeriodicityError),
    #[error("bundle constant {0} does not fit the explicit search; use a smaller b")]
    TooLarge(&'static str),
}

fn small(q: &crate::quantity::Quantity, name: &'static str) -> Result<u64, Lemma11Error> {
    q.to_u64().filter(|&x| x < 1 << 40).ok_or(Lemma11Error::TooLarge(name))
}

/// Level sets `0..=depth` from `origin`, with no counter cap in reach.
fn levels(oca: &Oca, origin: Configuration, depth: u64) -> Vec<BTreeSet<Configuration>> {
    oca.level_sets(origin, depth as usize, origin.counter + depth + 1).levels
}

/// Transition word of some path from the root to `target` at level `level`.
fn witness_path(oca: &Oca, lv: &[BTreeSet<Configuration>], level: usize, target: Configuration) -> Vec<usize> {
    let mut path = Vec::with_capacity(level);
    let mut cur = target;
    for j in (1..=level).rev() {
        let (prev, t) = lv[j - 1]
            .iter()
            .find_map(|&p| {
                oca.transitions()
                    .iter()
                    .position(|t| {
                        t.src == p.state
                            && t.dst == cur.state
                            && t.guard == Guard::of(p.counter)
                            && t.effect.apply(p.counter) == Some(cur.counter)
                    })
                    .map(|t| (p, t))
            })
            .expect("level sets are closed under predecessors");
        path.push(t);
        cur = prev;
    }
    path.reverse();
    path
}

fn diagnose(
    oca: &Oca,
    lv: &[BTreeSet<Configuration>],
    root: Configuration,
    level: usize,
    target: Configuration,
    threshold: u64,
) -> Option<Diagnostic> {
    let path = witness_path(oca, lv, level, target);
    let (scheme, exps) = compress_path(oca, root.state, &path);
    let reps = analyze_cycle_repetitions(oca, &scheme, &exps).ok()?;
    Some(Diagnostic {
        cycle_repetitions: reps.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        repetition_threshold: threshold,
        scheme_size: scheme.size(),
    })
}

/// Configurations of `from` without an equivalent one in the same state in
/// `to`.
fn unmatched(from: &BTreeSet<Configuration>, to: &BTreeSet<Configuration>, t: u64, p: u64) -> Option<Configuration> {
    from.iter().find(|c| !to.iter().any(|d| d.state == c.state && tp_equivalent(c.counter, d.counter, t, p))).copied()
}

/// Runs every implication at every state, root and level of `samples`.
pub fn check_lemma11(
    oca: &Oca,
    bundle: &ConstantBundle,
    samples: &LemmaSamples,
) -> Result<Lemma11Report, Lemma11Error> {
    let p = small(&bundle.p, "P")?;
    let tb = small(&bundle.prev_t, "prev_t")?;
    let pb = small(&bundle.prev_p, "prev_p")?;
    let st = small(&bundle.seg_threshold, "sT")?;
    let ct = small(&bundle.counter_threshold, "cT")?;
    let b8p = bundle.b.checked_pow(8).and_then(|x| x.checked_mul(p)).ok_or(Lemma11Error::TooLarge("b^8 P"))?;
    let rep_threshold = bundle.b.checked_pow(4).and_then(|x| x.checked_mul(p)).unwrap_or(u64::MAX);
    // segment starts are nonnegative once v - T̆ >= b⁸P
    let v0 = (ct + 1).max(tb + b8p);
    let lmax = samples.max_level;

    let mut tallies: BTreeMap<(Implication, usize), Tally> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut roots = Vec::new();
    let mut shift_mismatches = 0;
    let segments = bundle.m + 1;

    for s in 0..oca.num_states() {
        for &off in &samples.v_offsets {
            let v = v0 + off;
            let root = Configuration::new(s, v);
            let shifted_root = Configuration::new(s, v + p);
            roots.push(oca.show_configuration(root));
            let vb = BigUint::from(v);
            let core = bundle.core_levels(&vb)?;
            let mut shifts = BTreeMap::new();
            for l in 0..=lmax {
                let lb = BigUint::from(l);
                if core.contains(&lb) {
                    let sh = bundle.shift_map(&lb, &vb)?;
                    if bundle.shift_closed_form(&lb, &vb)? != sh {
                        shift_mismatches += 1;
                    }
                    shifts.insert(l, u64::try_from(sh).map_err(|_| Lemma11Error::TooLarge("shift"))?);
                }
            }
            let here = levels(oca, root, lmax);
            let there_depth = shifts.values().copied().max().unwrap_or(0);
            let there = levels(oca, shifted_root, there_depth);

            for l in 0..=lmax {
                let lb = BigUint::from(l);
                let record = |tallies: &mut BTreeMap<(Implication, usize), Tally>, imp, seg, outcome: Option<bool>| {
                    let t = tallies.entry((imp, seg)).or_default();
                    match outcome {
                        Some(true) => t.pass += 1,
                        Some(false) => t.fail += 1,
                        None => t.skipped += 1,
                    }
                };
                if let Some(&sh) = shifts.get(&l) {
                    let seg = core.segment_of(&lb).expect("core level");
                    let checks = [
                        (Implication::CoreBack, &there, sh, &here, l, shifted_root),
                        (Implication::CoreForward, &here, l, &there, sh, root),
                    ];
                    for (imp, src, src_level, dst, dst_level, src_root) in checks {
                        let miss = unmatched(&src[src_level as usize], &dst[dst_level as usize], tb, pb);
                        record(&mut tallies, imp, seg, Some(miss.is_none()));
                        if let Some(c) = miss {
                            if failures.len() < samples.max_details {
                                failures.push(Failure {
                                    implication: imp,
                                    root: oca.show_configuration(src_root),
                                    level: src_level,
                                    other_level: dst_level,
                                    segment: seg,
                                    unmatched: oca.show_configuration(c),
                                    diagnostic: diagnose(oca, src, src_root, src_level as usize, c, rep_threshold),
                                });
                            }
                        }
                    }
                } else {
                    let seg = core.starts.iter().rposition(|x| *x <= lb).unwrap_or(0);
                    if l < p {
                        record(&mut tallies, Implication::OutsideDown, seg, None);
                        record(&mut tallies, Implication::OutsideUp, seg, None);
                        continue;
                    }
                    let checks = [(Implication::OutsideDown, l, l - p), (Implication::OutsideUp, l - p, l)];
                    for (imp, from, to) in checks {
                        let miss = unmatched(&here[from as usize], &here[to as usize], tb, pb);
                        record(&mut tallies, imp, seg, Some(miss.is_none()));
                        if let Some(c) = miss {
                            if failures.len() < samples.max_details {
                                failures.push(Failure {
                                    implication: imp,
                                    root: oca.show_configuration(root),
                                    level: from,
                                    other_level: to,
                                    segment: seg,
                                    unmatched: oca.show_configuration(c),
                                    diagnostic: diagnose(oca, &here, root, from as usize, c, rep_threshold),
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    let note = if bundle.degenerate || !bundle.segment_count_ok {
        format!(
            "b = {} is below the regime the constants are designed for; failures are observations about the scaled bundle, not counterexamples",
            bundle.b
        )
    } else {
        format!("b = {}; levels sampled up to {}", bundle.b, lmax)
    };
    Ok(Lemma11Report {
        b: bundle.b,
        p,
        prev_t: tb,
        prev_p: pb,
        seg_threshold: st,
        counter_threshold: ct,
        segments,
        roots,
        tallies: tallies
            .into_iter()
            .map(|((implication, segment), tally)| TallyRow { implication, segment, tally })
            .collect(),
        failures,
        shift_mismatches,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodicity::ua_constants;
    use crate::quantity::Quantity;

    fn countdown() -> Oca {
        Oca::from_dsl(
            "states: s, t\natoms: p\nlabel t = {p}\ns -[>0,-1]-> s\ns -[=0,0]-> t\nt -[>0,0]-> t\nt -[=0,0]-> t\n",
        )
        .unwrap()
    }

    fn bundle(b: u64) -> ConstantBundle {
        ua_constants(2, &Quantity::zero(), &Quantity::one(), Some(b)).unwrap()
    }

    #[test]
    fn countdown_segment_zero_at_b1() {
        let r = check_lemma11(&countdown(), &bundle(1), &LemmaSamples::default()).unwrap();
        assert_eq!(r.failures_in_segment(0), 0);
        assert_eq!(r.shift_mismatches, 0);
        for imp in Implication::ALL {
            assert!(r.total(imp).pass > 0, "{imp:?}");
        }
        // at b = 1 the last segment ends one level before the zero test, so
        // the step onto the zero test is seen outside the core
        assert!(r.failures.iter().all(|f| f.segment == 1));
    }

    #[test]
    fn segment_zero_at_b2() {
        let samples = LemmaSamples { v_offsets: vec![0, 1], max_level: 12, max_details: 5 };
        let r = check_lemma11(&countdown(), &bundle(2), &samples).unwrap();
        assert_eq!(r.failures_in_segment(0), 0);
        // every sampled level lies in the segment-0 core at this scale
        assert_eq!(r.total(Implication::OutsideDown).pass, 0);
        assert!(r.total(Implication::CoreForward).pass > 0);
    }

    #[test]
    fn failures_carry_a_diagnostic() {
        // a deterministic 3-cycle has no period dividing P = 2 at b = 1
        let oca = Oca::from_dsl(
            "states: a, b, c\na -[>0,0]-> b\na -[=0,0]-> b\nb -[>0,0]-> c\nb -[=0,0]-> c\nc -[>0,0]-> a\nc -[=0,0]-> a\n",
        )
        .unwrap();
        let r = check_lemma11(
            &oca,
            &ua_constants(3, &Quantity::zero(), &Quantity::one(), Some(1)).unwrap(),
            &LemmaSamples::default(),
        )
        .unwrap();
        assert!(!r.failures.is_empty());
        let d = r.failures[0].diagnostic.as_ref().unwrap();
        // the level-4 path runs the 3-cycle once, too few copies to shift by P
        assert!(d.cycle_repetitions.values().all(|&n| n < d.repetition_threshold));
        assert_eq!(r.failures[0].level, 4);
    }
}
