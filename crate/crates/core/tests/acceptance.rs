// SPDX-License-Identifier: Apache-2.0
//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cequiv::admissibility::{g_admissible, minimal_admissible_sets};
use cequiv::boundary::{markov_boundary, markov_boundary_in_order};
use cequiv::equivalence::{
    admissibility_implications, boundary_union_equivalent, c_equivalent, equivalence_chain, pairwise_sufficient,
    EquivalenceTester, Sufficiency,
};
use cequiv::fixtures;
use cequiv::graph::random_dag;
use cequiv::oracle::{random_binary_model, random_model, search_violation, EstimandTable};
use cequiv::separation::{d_separated, minimal_separators, Backend, SeparationQuery};
use cequiv::{Dag, NodeId, VarSet};

type Outcome = Result<String, String>;

fn set(s: &str) -> VarSet {
    s.parse().unwrap()
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

fn summarize(failures: Vec<String>, detail: String) -> Outcome {
    if failures.is_empty() {
        Ok(detail)
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Err(format!("{} failure(s): {}", failures.len(), shown.join("; ")))
    }
}

/// All subsets of `pool`, in binary-counter order.
fn subsets(pool: &VarSet) -> Vec<VarSet> {
    let members: Vec<NodeId> = pool.iter().cloned().collect();
    (0..1usize << members.len())
        .map(|m| {
            members
                .iter()
                .enumerate()
                .filter(|(j, _)| m >> j & 1 == 1)
                .map(|(_, n)| n.clone())
                .collect()
        })
        .collect()
}

fn random_pair(rng: &mut ChaCha8Rng, g: &Dag) -> (NodeId, NodeId) {
    let mut nodes = g.nodes().to_vec();
    nodes.shuffle(rng);
    (nodes[0].clone(), nodes[1].clone())
}

fn claims() -> Outcome {
    let mut f = Vec::new();
    let g1 = fixtures::side_parents();
    let g2 = fixtures::instruments();
    let col = fixtures::collider();

    // (a)
    let (a, b) = (set("V1,W2"), set("V2,W1"));
    check(&mut f, g_admissible(&g1, "X", "Y", &a).unwrap().admissible, || "{V1,W2} admissible".into());
    check(&mut f, g_admissible(&g1, "X", "Y", &b).unwrap().admissible, || "{V2,W1} admissible".into());
    check(&mut f, c_equivalent(&g1, "X", "Y", &a, &b).unwrap().equivalent, || "{V1,W2} ≈ {V2,W1}".into());
    check(&mut f, pairwise_sufficient(&g1, "X", "Y", &a, &b).unwrap() == Sufficiency::Neither, || {
        "pairwise test reports neither".into()
    });

    // (b)
    let s = pairwise_sufficient(&g2, "X", "Y", &set("W1"), &set("W1,W2")).unwrap();
    check(&mut f, matches!(s, Sufficiency::Forward | Sufficiency::Both), || format!("{{W1}} vs {{W1,W2}}: {s}"));
    check(&mut f, c_equivalent(&g2, "X", "Y", &set("W1"), &set("W1,W2")).unwrap().equivalent, || {
        "{W1} ≈ {W1,W2}".into()
    });
    check(&mut f, !c_equivalent(&g2, "X", "Y", &set("W2"), &set("W1,W2")).unwrap().equivalent, || {
        "{W2} ≉ {W1,W2}".into()
    });
    check(&mut f, !c_equivalent(&g2, "X", "Y", &set("W1"), &set("W2")).unwrap().equivalent, || {
        "{W1} ≉ {W2}".into()
    });

    // (c)
    for (s, want) in [("W1,W2", "W1"), ("W2,V2", "W2,V2"), ("V1,W3", "V1"), ("W3", "")] {
        let got = markov_boundary(&g2, "X", &set(s)).unwrap().boundary;
        check(&mut f, got == set(want), || format!("boundary of {{{s}}} is {got}"));
    }

    // (d)
    let chain = equivalence_chain(&g2, "X", "Y", &set("W1,W2,V1"), &set("V2,W3")).unwrap();
    let text = chain.map(|c| c.to_string()).unwrap_or_default();
    let want = "{V1, W1, W2} ≈ {V1, W1} ≈ {V1} ≈ {V1, V2} ≈ {V2} ≈ {V2, W3}";
    check(&mut f, text == want, || format!("chain was {text:?}"));
    let to_w3 = equivalence_chain(&g2, "X", "Y", &set("W1,W2,V1"), &set("W3")).unwrap();
    check(&mut f, to_w3.is_none(), || "chain to {W3} should not exist".into());

    // (e)
    let r = admissibility_implications(&g2, "X", "Y", &set("W2,V2"), &set("V1,W3")).unwrap();
    check(&mut f, r.holds_given_z_boundary && r.holds_given_t_boundary, || format!("implications {r:?}"));
    let r = admissibility_implications(&g2, "X", "Y", &set("W2"), &set("W3")).unwrap();
    check(&mut f, !r.holds_given_z_boundary, || "implication given Zm should fail for {W2}, {W3}".into());

    // (f)
    check(&mut f, c_equivalent(&col, "X", "Y", &set("T"), &set("Z")).is_err(), || {
        "T is a descendant of X in the collider fixture".into()
    });
    let red = cequiv::equivalence::c_equivalent_reduced(&col, "X", "Y", &set("T"), &set("Z")).unwrap();
    check(&mut f, red.equivalent, || "collider: T ≈ Z (reduced)".into());
    let tz = cequiv::equivalence::c_equivalent_reduced(&col, "X", "Y", &set("T"), &set("T,Z")).unwrap();
    check(&mut f, !tz.equivalent, || "collider: T ≉ T ∪ Z".into());
    let split = cequiv::equivalence::set_subset_equivalent(&col, "X", "Y", &set("T"), &set("Z")).unwrap();
    check(&mut f, split.is_none(), || "collider: no split certifies T ≈ T ∪ Z".into());
    // the numeric side of (f)
    for seed in 0..5 {
        let d = random_binary_model(&col, seed).unwrap().joint().unwrap();
        let gap = |t: &str, z: &str| {
            d.adjustment_estimand("X", "Y", &set(t))
                .unwrap()
                .max_abs_diff(&d.adjustment_estimand("X", "Y", &set(z)).unwrap())
        };
        check(&mut f, gap("T", "Z") <= 1e-10, || format!("seed {seed}: A(T) != A(Z)"));
        check(&mut f, gap("T", "T,Z") > 1e-6, || format!("seed {seed}: A(T) == A(T,Z)"));
    }
    summarize(f, "all quoted fixture claims hold".into())
}

/// Random graph with `n` nodes, plus a treatment/outcome pair.
fn random_case(rng: &mut ChaCha8Rng, n_max: usize) -> (Dag, NodeId, NodeId) {
    let n = rng.random_range(3..=n_max);
    let p = rng.random_range(0.2..0.6);
    let g = random_dag(rng, n, p);
    let (x, y) = random_pair(rng, &g);
    (g, x, y)
}

struct Sweep {
    equivalent_pairs: usize,
    admissible_sets: usize,
    estimand_failures: Vec<String>,
    effect_failures: Vec<String>,
}

/// Shared by the soundness and the interventional-semantics criteria.
fn soundness_sweep() -> Sweep {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut s = Sweep {
        equivalent_pairs: 0,
        admissible_sets: 0,
        estimand_failures: Vec::new(),
        effect_failures: Vec::new(),
    };
    for gi in 0..200 {
        let (g, x, y) = random_case(&mut rng, 7);
        let tester = EquivalenceTester::new(&g, &x, &y).unwrap();
        let sets = subsets(&tester.candidates());
        let admissible: Vec<bool> = sets.iter().map(|z| tester.admissible(z).unwrap()).collect();
        let mut pairs = Vec::new();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if tester.equivalent(&sets[i], &sets[j]).unwrap() {
                    pairs.push((i, j));
                }
            }
        }
        s.equivalent_pairs += pairs.len();
        s.admissible_sets += admissible.iter().filter(|&&a| a).count();
        for seed in 0..20u64 {
            let m = random_binary_model(&g, seed).unwrap();
            let d = m.joint().unwrap();
            let est: Vec<EstimandTable> = sets.iter().map(|z| d.adjustment_estimand(&x, &y, z).unwrap()).collect();
            for &(i, j) in &pairs {
                let gap = est[i].max_abs_diff(&est[j]);
                if gap > 1e-10 {
                    s.estimand_failures
                        .push(format!("graph {gi} seed {seed}: {} vs {} gap {gap:e}", sets[i], sets[j]));
                }
            }
            let effect = m.causal_effect(&x, &y).unwrap();
            for (z, _) in sets.iter().zip(&admissible).filter(|(_, &a)| a) {
                let gap = est[sets.iter().position(|w| w == z).unwrap()].max_abs_diff(&effect);
                if gap > 1e-10 {
                    s.effect_failures.push(format!("graph {gi} seed {seed}: {z} gap {gap:e}"));
                }
            }
        }
    }
    s
}

fn necessity() -> Outcome {
    let mut f = Vec::new();
    let mut tested = 0;
    let mut worst_attempt = 0;
    for g in [fixtures::side_parents(), fixtures::instruments()] {
        let tester = EquivalenceTester::new(&g, "X", "Y").unwrap();
        let sets = subsets(&tester.candidates());
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if tester.equivalent(&sets[i], &sets[j]).unwrap() {
                    continue;
                }
                tested += 1;
                match search_violation(&g, "X", "Y", &sets[i], &sets[j], 500, 0).unwrap() {
                    Some(v) => worst_attempt = worst_attempt.max(v.attempt),
                    None => f.push(format!("{} vs {}", sets[i], sets[j])),
                }
            }
        }
    }
    summarize(
        f,
        format!("{tested} non-equivalent pairs, all refuted; latest hit at attempt {worst_attempt}"),
    )
}

fn union_test_agreement() -> Outcome {
    let mut f = Vec::new();
    let mut graphs: Vec<(Dag, NodeId, NodeId)> = ["X", "X"]
        .iter()
        .zip([fixtures::side_parents(), fixtures::instruments()])
        .map(|(_, g)| (g, NodeId::new("X").unwrap(), NodeId::new("Y").unwrap()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let p = rng.random_range(0.2..0.6);
        let g = random_dag(&mut rng, 7, p);
        let (x, y) = random_pair(&mut rng, &g);
        graphs.push((g, x, y));
    }
    let mut pairs = 0;
    for (gi, (g, x, y)) in graphs.iter().enumerate() {
        let tester = EquivalenceTester::new(g, x, y).unwrap();
        let sets = subsets(&tester.candidates());
        for t in &sets {
            for z in &sets {
                pairs += 1;
                let decided = tester.equivalent(t, z).unwrap();
                let union = boundary_union_equivalent(g, x, y, t, z).unwrap();
                check(&mut f, decided == union, || {
                    format!("graph {gi} ({x},{y}) {t} vs {z}: decision {decided}, union test {union}")
                });
            }
        }
    }
    summarize(f, format!("{pairs} ordered pairs over {} graphs agree", graphs.len()))
}

fn backend_agreement() -> Outcome {
    let mut f = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut triples = 0u64;
    for gi in 0..500 {
        let n = rng.random_range(2..=8);
        let p = rng.random_range(0.2..0.6);
        let g = random_dag(&mut rng, n, p);
        let nodes = g.nodes();
        // each node goes to a, b, s or nowhere
        for code in 0..4usize.pow(n as u32) {
            let mut parts = [VarSet::new(), VarSet::new(), VarSet::new()];
            let mut c = code;
            for node in nodes {
                if c % 4 < 3 {
                    parts[c % 4].insert(node.clone());
                }
                c /= 4;
            }
            if parts[0].is_empty() || parts[1].is_empty() {
                continue;
            }
            let [a, b, s] = parts;
            let q = SeparationQuery::new(&g, a, b, s).unwrap();
            let r = [Backend::Paths, Backend::Moral, Backend::Reach].map(|be| d_separated(&q, be).unwrap());
            triples += 1;
            check(&mut f, r[0] == r[1] && r[1] == r[2], || {
                format!("graph {gi}: {} vs {} given {}: {r:?}", q.a(), q.b(), q.s())
            });
        }
    }
    summarize(f, format!("{triples} triples over 500 graphs"))
}

fn boundary_uniqueness() -> Outcome {
    let mut f = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..500 {
        let n = rng.random_range(2..=10);
        let p = rng.random_range(0.2..0.6);
        let g = random_dag(&mut rng, n, p);
        let x = g.nodes()[rng.random_range(0..n)].clone();
        let s: VarSet = g.nodes().iter().filter(|v| **v != x && rng.random_bool(0.6)).cloned().collect();
        let reference = markov_boundary(&g, &x, &s).unwrap().boundary;
        let mut order: Vec<NodeId> = s.iter().cloned().collect();
        for _ in 0..20 {
            order.shuffle(&mut rng);
            let b = markov_boundary_in_order(&g, &x, &s, &order).unwrap().boundary;
            check(&mut f, b == reference, || format!("case {case}: {b} vs {reference}"));
        }
    }
    summarize(f, "500 cases x 20 orders give one boundary each".into())
}

fn separator_unions() -> Outcome {
    let mut f = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut sep_pairs, mut adm_pairs) = (0, 0);
    for gi in 0..200 {
        let n = rng.random_range(5..=9);
        let p = rng.random_range(0.2..0.5);
        let g = random_dag(&mut rng, n, p);
        for x in g.nodes() {
            for y in g.nodes() {
                if x == y {
                    continue;
                }
                let (xs, ys) = (VarSet::singleton(x.clone()), VarSet::singleton(y.clone()));
                if x < y && !g.has_edge(x, y) && !g.has_edge(y, x) {
                    let seps = minimal_separators(&g, x, y).unwrap();
                    for (i, a) in seps.iter().enumerate() {
                        for b in &seps[i + 1..] {
                            sep_pairs += 1;
                            let q = SeparationQuery::new(&g, xs.clone(), ys.clone(), a.union(b)).unwrap();
                            check(&mut f, d_separated(&q, Backend::Moral).unwrap(), || {
                                format!("graph {gi}: {a} ∪ {b} does not separate {x}, {y}")
                            });
                        }
                    }
                }
                let adm = minimal_admissible_sets(&g, x, y).unwrap();
                for (i, a) in adm.iter().enumerate() {
                    for b in &adm[i + 1..] {
                        adm_pairs += 1;
                        check(&mut f, g_admissible(&g, x, y, &a.union(b)).unwrap().admissible, || {
                            format!("graph {gi}: {a} ∪ {b} not admissible for ({x}, {y})")
                        });
                    }
                }
            }
        }
    }
    summarize(
        f,
        format!("{sep_pairs} separator pairs and {adm_pairs} admissible pairs, all unions hold"),
    )
}

fn propensity() -> Outcome {
    let mut f = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut separated_cases = 0;
    for case in 0..100 {
        let (g, x, y) = random_case(&mut rng, 7);
        let mut arity = BTreeMap::new();
        for v in g.nodes() {
            if *v != x {
                arity.insert(v.clone(), rng.random_range(2..=3));
            }
        }
        let m = random_model(&g, &arity, case).unwrap();
        let d = m.joint().unwrap();
        let z: VarSet = g
            .nodes()
            .iter()
            .filter(|v| **v != x && **v != y && rng.random_bool(0.5))
            .cloned()
            .collect();
        let direct = d.adjustment_estimand(&x, &y, &z).unwrap();
        let coarse = d.propensity_adjustment(&x, &y, &z).unwrap();
        let gap = direct.max_abs_diff(&coarse);
        check(&mut f, gap <= 1e-10, || format!("case {case}: gap {gap:e}"));
        let q = SeparationQuery::new(&g, VarSet::singleton(x.clone()), VarSet::singleton(y.clone()), z.clone())
            .unwrap();
        if d_separated(&q, Backend::Reach).unwrap() {
            separated_cases += 1;
            let dep = d.dependence_given_propensity(&x, &y, &z).unwrap();
            check(&mut f, dep <= 1e-10, || format!("case {case}: dependence {dep:e} given L({z})"));
        }
    }
    summarize(
        f,
        format!("100 estimand cases agree; {separated_cases} separated cases stay independent given the score"),
    )
}

fn polynomial_time() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = Duration::ZERO;
    let mut f = Vec::new();
    let mut queries = 0;
    while queries < 20 {
        let g = random_dag(&mut rng, 50, 0.08);
        let (x, y) = random_pair(&mut rng, &g);
        let tester = EquivalenceTester::new(&g, &x, &y).unwrap();
        let mut pool: Vec<NodeId> = tester.candidates().iter().cloned().collect();
        if pool.len() < 25 {
            continue;
        }
        pool.shuffle(&mut rng);
        let t: VarSet = pool[..25].iter().cloned().collect();
        pool.shuffle(&mut rng);
        let z: VarSet = pool[..25].iter().cloned().collect();
        let start = Instant::now();
        let v = c_equivalent(&g, &x, &y, &t, &z).unwrap();
        let took = start.elapsed();
        std::hint::black_box(v);
        worst = worst.max(took);
        queries += 1;
        check(&mut f, took < Duration::from_millis(100), || format!("query took {took:?}"));
    }
    summarize(f, format!("{queries} queries, slowest {worst:?}"))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, run: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS  {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name} ({secs:.2}s): {detail}");
            }
        }
    };

    report(1, "fixture claims", &|| {
        let start = Instant::now();
        let r = claims();
        let took = start.elapsed();
        match r {
            Ok(d) if took < Duration::from_secs(1) => Ok(d),
            Ok(_) => Err(format!("took {took:?}, limit 1 s")),
            e => e,
        }
    });

    let start = Instant::now();
    let sweep = soundness_sweep();
    let sweep_time = start.elapsed();
    report(2, "graphical equivalence is sound", &|| {
        let detail = format!(
            "{} equivalent pairs x 20 models, {sweep_time:.1?}",
            sweep.equivalent_pairs
        );
        summarize(sweep.estimand_failures.clone(), detail)
    });
    report(3, "non-equivalence has counterexamples", &necessity);
    report(4, "boundary-union test matches the decision", &union_test_agreement);
    report(5, "d-separation backends agree", &backend_agreement);
    report(6, "Markov boundary is order-independent", &boundary_uniqueness);
    report(7, "unions of minimal separators separate", &separator_unions);
    report(8, "propensity-score coarsening", &propensity);
    report(9, "admissible sets identify the causal effect", &|| {
        summarize(
            sweep.effect_failures.clone(),
            format!("{} admissible sets x 20 models", sweep.admissible_sets),
        )
    });
    report(10, "equivalence decision scales polynomially", &polynomial_time);

    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
