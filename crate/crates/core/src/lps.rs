//! Linear path schemes `α₀ β₁* α₁ … β_k* α_k` and cycle arithmetic.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith;
use crate::oca::{Configuration, Oca, StateId};

pub type Slope = Ratio<i64>;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LpsError {
    #[error("cycle slopes are not in the required order")]
    SlopeOrder,
    #[error("cycle length must be positive and |effect| <= length")]
    BadCycle,
    #[error("length delta {x} is not a nonzero multiple of lcm[1..{bound}]")]
    Divisibility { x: i128, bound: u64 },
    #[error("length delta {x} is not divisible by the determinant {det}")]
    NotIntegral { x: i128, det: i128 },
    #[error("scheme has {have} cycles but {given} exponents were given")]
    ExponentCount { have: usize, given: usize },
    #[error("transition sequence is not connected at position {0}")]
    Disconnected(usize),
    #[error("cycle {0} does not return to its start state")]
    NotACycle(usize),
}

/// Effect and length of a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CycleStats {
    pub effect: i64,
    pub length: i64,
}

impl CycleStats {
    pub fn new(effect: i64, length: i64) -> Result<CycleStats, LpsError> {
        if length < 1 || effect.abs() > length {
            return Err(LpsError::BadCycle);
        }
        Ok(CycleStats { effect, length })
    }

    pub fn slope(&self) -> Slope {
        Ratio::new(self.effect, self.length)
    }
}

/// All fractions `x/y` with `|x| <= y <= b`, ascending and without duplicates.
pub fn basic_slopes(b: u64) -> Vec<Slope> {
    let b = b as i64;
    let mut out: Vec<Slope> =
        (1..=b).flat_map(|y| (-y..=y).filter(move |&x| x.gcd(&y) == 1).map(move |x| Ratio::new_raw(x, y))).collect();
    out.sort_unstable_by(|a, b| (a.numer() * b.denom()).cmp(&(b.numer() * a.denom())));
    out
}

/// Nonnegative repetition counts `(k1, k3)` with
/// `(k1·e1 + k3·e3) / (k1·ℓ1 + k3·ℓ3) = e2/ℓ2`, reduced by their gcd.
/// Requires `slope1 <= slope2 <= slope3`. Both counts are at most `2b²` when
/// all lengths are at most `b`.
pub fn combine_cycles_ratio(c1: CycleStats, c2: CycleStats, c3: CycleStats) -> Result<(u64, u64), LpsError> {
    let (s1, s2, s3) = (c1.slope(), c2.slope(), c3.slope());
    if s1 > s2 || s2 > s3 {
        return Err(LpsError::SlopeOrder);
    }
    if s1 == s2 {
        return Ok((1, 0));
    }
    if s2 == s3 {
        return Ok((0, 1));
    }
    let k1 = c2.length * c3.effect - c3.length * c2.effect;
    let k3 = c1.length * c2.effect - c2.length * c1.effect;
    let g = k1.gcd(&k3);
    Ok(((k1 / g) as u64, (k3 / g) as u64))
}

/// Signed repetition deltas `(k1, k2)` with `k1·e1 + k2·e2 = 0` and
/// `k1·ℓ1 + k2·ℓ2 = x`. Requires `slope1 < slope2` and `x` a nonzero multiple
/// of `lcm[1..2b²]`.
pub fn adjust_length(c1: CycleStats, c2: CycleStats, x: i128, b: u64) -> Result<(i128, i128), LpsError> {
    if c1.slope() >= c2.slope() {
        return Err(LpsError::SlopeOrder);
    }
    let bound = 2 * b * b;
    let l = arith::lcm_upto(bound).to_u128();
    if x == 0 || l.is_none_or(|l| x.unsigned_abs() % l != 0) {
        return Err(LpsError::Divisibility { x, bound });
    }
    let det = (c2.effect * c1.length - c1.effect * c2.length) as i128;
    if x % det != 0 {
        return Err(LpsError::NotIntegral { x, det });
    }
    let q = x / det;
    Ok((q * c2.effect as i128, -q * c1.effect as i128))
}

/// A scheme over transition indices of a fixed automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lps {
    pub start: StateId,
    pub alpha0: Vec<usize>,
    /// `(β_i, α_i)` pairs in order.
    pub segments: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Lps {
    pub fn empty(start: StateId) -> Lps {
        Lps { start, alpha0: vec![], segments: vec![] }
    }

    /// `|α₀β₁α₁⋯β_kα_k|`.
    pub fn flat_length(&self) -> usize {
        self.alpha0.len() + self.segments.iter().map(|(b, a)| b.len() + a.len()).sum::<usize>()
    }

    /// Number of cycles `k`.
    pub fn size(&self) -> usize {
        self.segments.len()
    }

    fn pieces(&self) -> impl Iterator<Item = &Vec<usize>> {
        std::iter::once(&self.alpha0).chain(self.segments.iter().flat_map(|(b, a)| [b, a]))
    }

    /// State reached after the flat word, checking connectivity and cycles.
    pub fn check(&self, oca: &Oca) -> Result<StateId, LpsError> {
        let tr = oca.transitions();
        let mut cur = self.start;
        let mut pos = 0;
        for (i, piece) in self.pieces().enumerate() {
            let begin = cur;
            for &t in piece {
                if tr[t].src != cur {
                    return Err(LpsError::Disconnected(pos));
                }
                cur = tr[t].dst;
                pos += 1;
            }
            if i % 2 == 1 && (piece.is_empty() || cur != begin) {
                return Err(LpsError::NotACycle(i / 2));
            }
        }
        Ok(cur)
    }

    pub fn cycle_stats(&self, oca: &Oca) -> Vec<CycleStats> {
        self.segments
            .iter()
            .map(|(b, _)| CycleStats {
                effect: b.iter().map(|&t| oca.transitions()[t].effect.delta()).sum(),
                length: b.len() as i64,
            })
            .collect()
    }

    /// The concrete transition word for the given exponents.
    pub fn flatten(&self, exponents: &[u64]) -> Result<Vec<usize>, LpsError> {
        if exponents.len() != self.size() {
            return Err(LpsError::ExponentCount { have: self.size(), given: exponents.len() });
        }
        let mut out = self.alpha0.clone();
        for ((b, a), &e) in self.segments.iter().zip(exponents) {
            for _ in 0..e {
                out.extend_from_slice(b);
            }
            out.extend_from_slice(a);
        }
        Ok(out)
    }

    pub fn describe(&self, oca: &Oca) -> LpsDoc {
        let word = |ts: &[usize]| -> Vec<String> {
            ts.iter()
                .map(|&t| {
                    let t = oca.transitions()[t];
                    format!("{} -[{},{}]-> {}", oca.state_name(t.src), t.guard, t.effect, oca.state_name(t.dst))
                })
                .collect()
        };
        LpsDoc {
            start: oca.state_name(self.start).to_string(),
            alpha0: word(&self.alpha0),
            segments: self.segments.iter().map(|(b, a)| SegmentDoc { beta: word(b), alpha: word(a) }).collect(),
            flat_length: self.flat_length(),
            size: self.size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LpsDoc {
    pub start: String,
    pub alpha0: Vec<String>,
    pub segments: Vec<SegmentDoc>,
    pub flat_length: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentDoc {
    pub beta: Vec<String>,
    pub alpha: Vec<String>,
}

/// Simple cycles through `q` (no state repeated before returning), as
/// transition-index words in lexicographic order, of length at most `max_len`.
pub fn simple_cycles(oca: &Oca, q: StateId, max_len: usize) -> Vec<Vec<usize>> {
    fn go(
        oca: &Oca,
        q: StateId,
        cur: StateId,
        max_len: usize,
        word: &mut Vec<usize>,
        seen: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if word.len() == max_len {
            return;
        }
        for (i, t) in oca.transitions().iter().enumerate() {
            if t.src != cur {
                continue;
            }
            if t.dst == q {
                word.push(i);
                out.push(word.clone());
                word.pop();
            } else if !seen[t.dst] {
                seen[t.dst] = true;
                word.push(i);
                go(oca, q, t.dst, max_len, word, seen, out);
                word.pop();
                seen[t.dst] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; oca.num_states()];
    seen[q] = true;
    go(oca, q, q, max_len, &mut Vec::new(), &mut seen, &mut out);
    out.sort();
    out
}

struct Frame {
    scheme: Lps,
    state: StateId,
    next_choice: usize,
}

/// Depth-first stream of every scheme from `start` to `end` within the flat
/// length and size bounds. Cycles are simple. Each scheme is produced once:
/// a node is emitted before its extensions, which are tried as single
/// transitions in index order and then as new cycles in lexicographic order.
pub struct LpsIter<'a> {
    oca: &'a Oca,
    end: StateId,
    flat_bound: usize,
    size_bound: usize,
    cycles: Vec<Vec<Vec<usize>>>,
    outgoing: Vec<Vec<usize>>,
    stack: Vec<Frame>,
    pending: Option<Lps>,
}

pub fn enumerate_lps(oca: &Oca, start: StateId, end: StateId, flat_bound: usize, size_bound: usize) -> LpsIter<'_> {
    let cycles = (0..oca.num_states()).map(|q| simple_cycles(oca, q, flat_bound)).collect();
    let mut outgoing = vec![Vec::new(); oca.num_states()];
    for (i, t) in oca.transitions().iter().enumerate() {
        outgoing[t.src].push(i);
    }
    let root = Lps::empty(start);
    LpsIter {
        oca,
        end,
        flat_bound,
        size_bound,
        cycles,
        outgoing,
        pending: (start == end).then(|| root.clone()),
        stack: vec![Frame { scheme: root, state: start, next_choice: 0 }],
    }
}

impl Iterator for LpsIter<'_> {
    type Item = Lps;

    fn next(&mut self) -> Option<Lps> {
        if let Some(s) = self.pending.take() {
            return Some(s);
        }
        while let Some(top) = self.stack.last_mut() {
            let state = top.state;
            let choice = top.next_choice;
            top.next_choice += 1;
            let flat = top.scheme.flat_length();
            let n_alpha = self.outgoing[state].len();
            let child = if choice < n_alpha {
                if flat + 1 > self.flat_bound {
                    None
                } else {
                    let t = self.outgoing[state][choice];
                    let mut s = top.scheme.clone();
                    match s.segments.last_mut() {
                        Some((_, a)) => a.push(t),
                        None => s.alpha0.push(t),
                    }
                    Some((s, self.oca.transitions()[t].dst))
                }
            } else if choice < n_alpha + self.cycles[state].len() {
                let beta = &self.cycles[state][choice - n_alpha];
                if top.scheme.size() >= self.size_bound || flat + beta.len() > self.flat_bound {
                    None
                } else {
                    let mut s = top.scheme.clone();
                    s.segments.push((beta.clone(), vec![]));
                    Some((s, state))
                }
            } else {
                self.stack.pop();
                continue;
            };
            if let Some((scheme, dst)) = child {
                let emit = dst == self.end;
                let out = emit.then(|| scheme.clone());
                self.stack.push(Frame { scheme, state: dst, next_choice: 0 });
                if out.is_some() {
                    return out;
                }
            }
        }
        None
    }
}

/// End configurations of valid paths shaped by `scheme` with exactly
/// `target_len` steps and every exponent at most `exp_cap`, each with one
/// witnessing exponent vector.
pub fn shaped_witnesses(
    oca: &Oca,
    scheme: &Lps,
    start: Configuration,
    target_len: usize,
    exp_cap: u64,
) -> BTreeMap<Configuration, Vec<u64>> {
    let mut out = BTreeMap::new();
    if start.state != scheme.start {
        return out;
    }
    let tr = oca.transitions();
    let run = |c: Configuration, word: &[usize]| -> Option<Configuration> {
        word.iter().try_fold(c, |c, &t| {
            let t = tr[t];
            if t.src != c.state || t.guard != crate::oca::Guard::of(c.counter) {
                return None;
            }
            Some(Configuration::new(t.dst, t.effect.apply(c.counter)?))
        })
    };
    let Some(c0) = run(start, &scheme.alpha0) else { return out };
    if scheme.alpha0.len() > target_len {
        return out;
    }
    let mut seen = HashSet::new();
    let mut exps = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        scheme: &Lps,
        run: &dyn Fn(Configuration, &[usize]) -> Option<Configuration>,
        i: usize,
        c: Configuration,
        left: usize,
        exp_cap: u64,
        exps: &mut Vec<u64>,
        seen: &mut HashSet<(usize, Configuration, usize)>,
        out: &mut BTreeMap<Configuration, Vec<u64>>,
    ) {
        if i == scheme.segments.len() {
            if left == 0 {
                out.entry(c).or_insert_with(|| exps.clone());
            }
            return;
        }
        if !seen.insert((i, c, left)) {
            return;
        }
        let (beta, alpha) = &scheme.segments[i];
        let mut cur = Some(c);
        let mut e = 0u64;
        while let Some(cc) = cur {
            let used = e as usize * beta.len();
            if used + alpha.len() > left {
                break;
            }
            if let Some(after) = run(cc, alpha) {
                exps.push(e);
                go(scheme, run, i + 1, after, left - used - alpha.len(), exp_cap, exps, seen, out);
                exps.pop();
            }
            if e == exp_cap {
                break;
            }
            e += 1;
            cur = run(cc, beta);
        }
    }
    go(scheme, &run, 0, c0, target_len - scheme.alpha0.len(), exp_cap, &mut exps, &mut seen, &mut out);
    out
}

/// End configurations of valid `scheme`-shaped paths of length `target_len`.
pub fn shaped_reach(
    oca: &Oca,
    scheme: &Lps,
    start: Configuration,
    target_len: usize,
    exp_cap: u64,
) -> BTreeSet<Configuration> {
    shaped_witnesses(oca, scheme, start, target_len, exp_cap).into_keys().collect()
}

/// Total repetitions per cycle slope.
pub fn analyze_cycle_repetitions(oca: &Oca, scheme: &Lps, exponents: &[u64]) -> Result<BTreeMap<Slope, u64>, LpsError> {
    if exponents.len() != scheme.size() {
        return Err(LpsError::ExponentCount { have: scheme.size(), given: exponents.len() });
    }
    let mut out = BTreeMap::new();
    for (st, &e) in scheme.cycle_stats(oca).iter().zip(exponents) {
        *out.entry(st.slope()).or_insert(0) += e;
    }
    Ok(out)
}

/// Greedy compression of a concrete transition word from `start` into a
/// scheme. At each position the cycle whose consecutive copies cover the most
/// steps becomes `β^e` (ties go to the shorter cycle); steps no cycle covers
/// at least twice stay in the surrounding `α`.
pub fn compress_path(oca: &Oca, start: StateId, path: &[usize]) -> (Lps, Vec<u64>) {
    let tr = oca.transitions();
    let mut scheme = Lps::empty(start);
    let mut exps = Vec::new();
    let mut alpha: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < path.len() {
        let mut best: Option<(usize, usize)> = None;
        for len in 1..=(path.len() - i) / 2 {
            let beta = &path[i..i + len];
            if tr[beta[0]].src != tr[beta[len - 1]].dst {
                continue;
            }
            let reps = 1 + path[i + len..].chunks_exact(len).take_while(|c| *c == beta).count();
            if reps >= 2 && best.is_none_or(|(l, r)| reps * len > l * r) {
                best = Some((len, reps));
            }
        }
        match best {
            Some((len, reps)) => {
                match scheme.segments.last_mut() {
                    Some((_, a)) => *a = std::mem::take(&mut alpha),
                    None => scheme.alpha0 = std::mem::take(&mut alpha),
                }
                scheme.segments.push((path[i..i + len].to_vec(), vec![]));
                exps.push(reps as u64);
                i += len * reps;
            }
            None => {
                alpha.push(path[i]);
                i += 1;
            }
        }
    }
    match scheme.segments.last_mut() {
        Some((_, a)) => *a = alpha,
        None => scheme.alpha0 = alpha,
    }
    (scheme, exps)
}

/// Schemes within the bounds that witness `from ⇝ to` in exactly `length`
/// steps, each with its exponents. Concrete paths are enumerated backwards
/// from `to` through the forward level sets of `from`, so every partial path
/// extends to a full one; each path is compressed, at most `max_paths` paths
/// are tried and at most `limit` distinct schemes are returned.
pub fn find_shaped_witnesses(
    oca: &Oca,
    from: Configuration,
    to: Configuration,
    length: usize,
    bounds: (usize, usize),
    limit: usize,
    max_paths: usize,
) -> Vec<(Lps, Vec<u64>)> {
    let levels = oca.level_sets(from, length, from.counter + length as u64 + 1).levels;
    find_in_levels(oca, &levels, to, length, bounds, limit, max_paths)
}

/// [`find_shaped_witnesses`] over level sets already computed from the
/// origin, which is `levels[0]`.
pub fn find_in_levels(
    oca: &Oca,
    levels: &[BTreeSet<Configuration>],
    to: Configuration,
    length: usize,
    (flat_bound, size_bound): (usize, usize),
    limit: usize,
    max_paths: usize,
) -> Vec<(Lps, Vec<u64>)> {
    let mut out: Vec<(Lps, Vec<u64>)> = Vec::new();
    let Some(&from) = levels.first().and_then(|l| l.first()) else { return out };
    if !levels.get(length).is_some_and(|l| l.contains(&to)) {
        return out;
    }
    let tr = oca.transitions();
    // first transition at index >= after entering d at level k from level k - 1
    let into = |k: usize, d: Configuration, after: usize| -> Option<(usize, Configuration)> {
        tr.iter().enumerate().skip(after).find_map(|(i, t)| {
            if t.dst != d.state {
                return None;
            }
            let prev = match t.effect.delta() {
                1 => d.counter.checked_sub(1)?,
                0 => d.counter,
                _ => d.counter + 1,
            };
            let c = Configuration::new(t.src, prev);
            (t.guard == crate::oca::Guard::of(prev) && levels[k - 1].contains(&c)).then_some((i, c))
        })
    };
    let mut tried = 0usize;
    let mut rev: Vec<usize> = Vec::with_capacity(length);
    let mut stack: Vec<(Configuration, usize)> = vec![(to, 0)];
    while let Some(&mut (d, ref mut next)) = stack.last_mut() {
        let k = length - rev.len();
        if k == 0 {
            tried += 1;
            let path: Vec<usize> = rev.iter().rev().copied().collect();
            let (scheme, exps) = compress_path(oca, from.state, &path);
            let fits = scheme.flat_length() <= flat_bound && scheme.size() <= size_bound;
            if fits
                && !out.iter().any(|(s, _)| *s == scheme)
                && shaped_witnesses(oca, &scheme, from, length, length as u64).contains_key(&to)
            {
                out.push((scheme, exps));
            }
            if out.len() >= limit || tried >= max_paths {
                break;
            }
            stack.pop();
            rev.pop();
            continue;
        }
        match into(k, d, *next) {
            Some((i, c)) => {
                *next = i + 1;
                rev.push(i);
                stack.push((c, 0));
            }
            None => {
                stack.pop();
                rev.pop();
            }
        }
    }
    out
}
