//! Seeded generation of well-formed automata for testing.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Effect, Guard, Oca, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomOcaParams {
    pub states: usize,
    pub atoms: usize,
    /// Transitions added on top of the one-per-guard minimum.
    pub extra_transitions: usize,
    pub seed: u64,
}

/// Random valid automaton with states `s0..` and atoms `p`, `q`, `a2`, ….
/// Every state gets at least one transition per guard, and zero-guarded
/// transitions never decrement.
pub fn random_oca(params: &RandomOcaParams) -> Oca {
    let n = params.states.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let atoms: Vec<String> = (0..params.atoms)
        .map(|i| match i {
            0 => "p".to_string(),
            1 => "q".to_string(),
            _ => format!("a{i}"),
        })
        .collect();
    let labels = (0..n).map(|_| (0..params.atoms).filter(|_| rng.gen_bool(0.5)).collect::<BTreeSet<_>>()).collect();
    let pick = |rng: &mut ChaCha8Rng, src: usize, guard: Guard| {
        let effect = match (guard, rng.gen_range(0..3)) {
            (Guard::Zero, 0) | (_, 1) => Effect::Keep,
            (Guard::Pos, 0) => Effect::Dec,
            _ => Effect::Inc,
        };
        Transition { src, guard, effect, dst: rng.gen_range(0..n) }
    };
    let mut transitions = Vec::new();
    for s in 0..n {
        transitions.push(pick(&mut rng, s, Guard::Zero));
        transitions.push(pick(&mut rng, s, Guard::Pos));
    }
    for _ in 0..params.extra_transitions {
        let s = rng.gen_range(0..n);
        let g = if rng.gen_bool(0.5) { Guard::Zero } else { Guard::Pos };
        transitions.push(pick(&mut rng, s, g));
    }
    Oca::new(states, atoms, labels, transitions).expect("generated automaton is well-indexed")
}
