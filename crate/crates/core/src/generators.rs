//! Deterministic parametric game families.
//!
//! # The adversarial family
//!
//! `gen_adversarial(i)` has a player-1 root `root` (the initial position)
//! that enters any of `i` gadgets, plus a player-1 sink `safe` with a
//! self-loop. Gadget `j` has six player-0 positions:
//!
//! ```text
//! e_j --hub--> x_j --exit--> safe       x_j --detour--> a_j
//! e_j --p1---> a_j --b1--> b_j --exit--> safe
//!              a_j --b2--> c_j --exit--> safe
//! e_j --p2---> d_j --b2--> c_j
//! ```
//!
//! Every winning strategy visits `e_j`. Routing through `x_j` costs one more
//! position, routing through `a_j` or `d_j` costs two, so the sparsest
//! strategy has density `2i` and needs the hub route in every gadget.
//!
//! The local search over a random order of the winning player-0 positions
//! locks gadget `j` into a private route exactly when `x_j` is tried while
//! some private route is still alive. The private side dies once `a_j` is
//! gone or both of `b_j`, `c_j` are gone, *and* `d_j` or `c_j` is gone.
//! Over the 120 equally likely relative orders of `x_j, a_j, b_j, c_j, d_j`,
//! exactly 60 reach `x_j` first (the unit test `trap_probability_is_one_half`
//! enumerates them), and entries are never deletable. Gadgets share no
//! player-0 position, so the traps are independent and the search finds the
//! sparsest strategy with probability exactly `2⁻ⁱ`. A trapped gadget costs
//! three positions instead of two, so local optima range over `2i..=3i`.
//!
//! The `detour` edge makes some specializations wasteful (visiting `x_j` and
//! a private route), which gives plain random extraction non-locally-optimal
//! outcomes without changing the local-search analysis.

use crate::game::{GameBuilder, Owner, SafetyGame};
use crate::rng::{RngSeed, SplitMix64};

fn width(n: usize) -> usize {
    n.to_string().len().max(2)
}

/// Alternating chain `r1 → c1 → r2 → … → cn`, closed by `cn → rn`. Player 0
/// has exactly one move everywhere, so the only strategy has density `n`.
pub fn gen_chain(n: usize) -> SafetyGame {
    assert!(n >= 1, "chain length must be positive");
    let w = width(n);
    let r = |k: usize| format!("r{k:0w$}");
    let c = |k: usize| format!("c{k:0w$}");
    let mut b = GameBuilder::new();
    for k in 1..=n {
        b.add_position(&r(k), Owner::One).unwrap();
        b.add_position(&c(k), Owner::Zero).unwrap();
    }
    for k in 1..=n {
        b.add_edge(&r(k), "u", &c(k)).unwrap();
        let next = if k == n { r(n) } else { r(k + 1) };
        b.add_edge(&c(k), "x", &next).unwrap();
    }
    b.set_init(&r(1)).unwrap();
    b.build().unwrap()
}

pub fn gen_adversarial(i: usize) -> SafetyGame {
    assert!(i >= 1, "at least one gadget");
    let w = width(i);
    let mut b = GameBuilder::new();
    b.add_position("root", Owner::One).unwrap();
    b.add_position("safe", Owner::One).unwrap();
    b.add_edge("safe", "stay", "safe").unwrap();
    for j in 1..=i {
        let name = |p: &str| format!("{p}{j:0w$}");
        for p in ["e", "x", "a", "b", "c", "d"] {
            b.add_position(&name(p), Owner::Zero).unwrap();
        }
        b.add_edge("root", &format!("enter{j:0w$}"), &name("e")).unwrap();
        b.add_edge(&name("e"), "hub", &name("x")).unwrap();
        b.add_edge(&name("e"), "p1", &name("a")).unwrap();
        b.add_edge(&name("e"), "p2", &name("d")).unwrap();
        b.add_edge(&name("x"), "exit", "safe").unwrap();
        b.add_edge(&name("x"), "detour", &name("a")).unwrap();
        b.add_edge(&name("a"), "b1", &name("b")).unwrap();
        b.add_edge(&name("a"), "b2", &name("c")).unwrap();
        b.add_edge(&name("d"), "b2", &name("c")).unwrap();
        b.add_edge(&name("b"), "exit", "safe").unwrap();
        b.add_edge(&name("c"), "exit", "safe").unwrap();
    }
    b.set_init("root").unwrap();
    b.build().unwrap()
}

/// Random game with `n0` player-0 and `n1` player-1 positions. Each position
/// gets between 0 and `k` outgoing edges labelled with distinct actions, with
/// uniformly drawn targets; the initial position is uniform over all.
pub fn gen_random(seed: RngSeed, n0: usize, n1: usize, k: usize) -> SafetyGame {
    random_game(seed, n0, n1, k, false)
}

/// Like [`gen_random`], but every edge crosses to the other player and the
/// initial position belongs to player 1.
pub fn gen_random_alternating(seed: RngSeed, n0: usize, n1: usize, k: usize) -> SafetyGame {
    random_game(seed, n0, n1, k, true)
}

fn random_game(seed: RngSeed, n0: usize, n1: usize, k: usize, alternating: bool) -> SafetyGame {
    assert!(n0 >= 1 && n1 >= 1 && k >= 1, "sizes must be positive");
    let mut rng = SplitMix64::new(seed);
    let w = width(n0.max(n1).max(k));
    let zero: Vec<String> = (0..n0).map(|i| format!("p{i:0w$}")).collect();
    let one: Vec<String> = (0..n1).map(|i| format!("q{i:0w$}")).collect();
    let all: Vec<&String> = zero.iter().chain(one.iter()).collect();

    let mut b = GameBuilder::new();
    for p in &zero {
        b.add_position(p, Owner::Zero).unwrap();
    }
    for p in &one {
        b.add_position(p, Owner::One).unwrap();
    }
    for (src, prefix, others) in zero
        .iter()
        .map(|p| (p, "x", &one))
        .chain(one.iter().map(|p| (p, "y", &zero)))
    {
        let count = rng.index(k + 1);
        let mut labels: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut labels);
        for &l in &labels[..count] {
            let dst = if alternating {
                &others[rng.index(others.len())]
            } else {
                all[rng.index(all.len())]
            };
            b.add_edge(src, &format!("{prefix}{l:0w$}"), dst).unwrap();
        }
    }
    let init = if alternating {
        &one[rng.index(n1)]
    } else {
        all[rng.index(all.len())]
    };
    b.set_init(init).unwrap();
    b.build().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_game;
    use crate::heuristics::smart_extract_with_order;
    use crate::solve::{compute_winning_region, density, solve};

    #[test]
    fn chain_shapes() {
        let g = gen_chain(1);
        assert_eq!(g.num_positions(), 2);
        assert!(g.is_alternating());
        let g = gen_chain(7);
        assert_eq!(g.count_positions(Owner::Zero), 7);
        assert_eq!(serialize_game(&g), serialize_game(&gen_chain(7)));
        let mp = solve(&g).unwrap();
        assert!(mp.domain().all(|v| mp.allowed(v).len() == 1));
    }

    #[test]
    fn adversarial_grows_by_a_constant() {
        let sizes: Vec<(usize, usize)> = (1..6)
            .map(|i| {
                let g = gen_adversarial(i);
                (g.num_positions(), g.num_edges())
            })
            .collect();
        for w in sizes.windows(2) {
            assert_eq!(w[1].0 - w[0].0, 6);
            assert_eq!(w[1].1 - w[0].1, 11);
        }
    }

    #[test]
    fn trap_probability_is_one_half() {
        // Every relative order of x, a, b, c, d in a single gadget.
        let g = gen_adversarial(1);
        let id = |n: &str| g.position_by_name(n).unwrap();
        let names = ["x01", "a01", "b01", "c01", "d01"];
        fn permutations(rest: &[usize]) -> Vec<Vec<usize>> {
            if rest.is_empty() {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for (k, &head) in rest.iter().enumerate() {
                let mut tail = rest.to_vec();
                tail.remove(k);
                for mut p in permutations(&tail) {
                    p.insert(0, head);
                    out.push(p);
                }
            }
            out
        }
        let perms = permutations(&[0, 1, 2, 3, 4]);
        assert_eq!(perms.len(), 120);
        let mut trapped = 0;
        for p in &perms {
            let mut order = vec![id("e01")];
            order.extend(p.iter().map(|&i| id(names[i])));
            let s = smart_extract_with_order(&g, &order, None).unwrap();
            match density(&g, &s) {
                2 => {}
                3 => trapped += 1,
                d => panic!("unexpected density {d}"),
            }
        }
        assert_eq!(trapped, 60);
    }

    #[test]
    fn random_games_are_seeded() {
        let a = gen_random(RngSeed(11), 6, 5, 3);
        let b = gen_random(RngSeed(11), 6, 5, 3);
        assert_eq!(a, b);
        assert_ne!(serialize_game(&a), serialize_game(&gen_random(RngSeed(12), 6, 5, 3)));
        let alt = gen_random_alternating(RngSeed(4), 5, 5, 3);
        assert!(alt.is_alternating());
        assert_eq!(alt.owner(alt.init()), Owner::One);
    }

    #[test]
    fn some_random_games_are_solvable() {
        let solvable = (0..200)
            .filter(|&s| {
                let g = gen_random(RngSeed(s), 8, 8, 3);
                compute_winning_region(&g).contains(g.init())
            })
            .count();
        assert!(solvable > 20, "{solvable}");
    }
}
