//! Acceptance checks, one PASS/FAIL line each. Run with
//! `cargo test -p nerperturb-core --test acceptance`; exits non-zero when any
//! check fails.

mod common;

use common::{brute_force_spans, fixture, random_scores, random_sentence, set_f1, toy_corpus, toy_lexicon, toy_stub};
use nerperturb_backend::{serve_stub, stable_hash, Client, StubConfig};
use nerperturb_core::selection::non_entity_indices;
use nerperturb_core::{
    attack_corpus, evaluate_attack, extract_spans, f1_score, find_wordnet_dir, load_wordnet, read_conll,
    replacement_log, run_sweep, select, serialize_conll, AttackConfig, AttackResources, Corpus, EntitySpan,
    EvalOptions, ImportanceScores, ReplacerKind, SelectionMethod, Sentence, SweepPlan, WnPos,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn roundtrip() -> Check {
    let mut paths: Vec<_> = std::fs::read_dir(fixture("roundtrip"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    ensure(paths.len() == 20, || {
        format!("{} fixture files, expected 20", paths.len())
    })?;
    let start = Instant::now();
    let mut sentences = 0;
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let corpus = read_conll(path).map_err(|e| e.to_string())?;
        sentences += corpus.len();
        ensure(serialize_conll(&corpus) == text, || {
            format!("{} differs after round trip", path.display())
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("20 files, {sentences} sentences, byte-exact in {elapsed:.2?}"))
}

fn random_tags(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.random_range(0..=20);
    (0..n)
        .map(|_| match rng.random_range(0..5) {
            0 | 1 => "O".to_string(),
            2 => format!("B-{}", ["PER", "LOC", "ORG"][rng.random_range(0..3)]),
            _ => format!("I-{}", ["PER", "LOC", "ORG"][rng.random_range(0..3)]),
        })
        .collect()
}

fn span_decoding() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..10_000 {
        let tags = random_tags(&mut rng);
        let got: BTreeSet<EntitySpan> = extract_spans(&tags).map_err(|e| e.to_string())?.into_iter().collect();
        ensure(got == brute_force_spans(&tags), || {
            format!("random case {case} {tags:?}")
        })?;
    }
    let text = std::fs::read_to_string(fixture("bio/conlleval_cases.jsonl")).map_err(|e| e.to_string())?;
    let mut bare_i = 0;
    let mut n = 0;
    for line in text.lines() {
        #[derive(serde::Deserialize)]
        struct Case {
            tags: Vec<String>,
            spans: Vec<(usize, usize, String)>,
        }
        let case: Case = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let expected: Vec<EntitySpan> = case
            .spans
            .into_iter()
            .map(|(s, e, t)| EntitySpan::new(s, e, t))
            .collect();
        let got = extract_spans(&case.tags).map_err(|e| e.to_string())?;
        ensure(got == expected, || {
            format!("conlleval case {:?}: got {got:?}", case.tags)
        })?;
        let opens_with_i = case
            .tags
            .iter()
            .enumerate()
            .any(|(i, t)| t.starts_with("I-") && (i == 0 || case.tags[i - 1] == "O"));
        bare_i += usize::from(opens_with_i);
        n += 1;
    }
    ensure(n == 50, || format!("{n} conlleval cases, expected 50"))?;
    ensure(bare_i > 0, || "suite has no bare I- openings".into())?;
    Ok(format!(
        "10000 random sequences match brute force; {n} conlleval cases ({bare_i} with bare I-) match"
    ))
}

fn f1_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for pair in 0..500 {
        let sentences = rng.random_range(1..=6);
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for _ in 0..sentences {
            let g = random_tags(&mut rng);
            let p: Vec<String> = g
                .iter()
                .map(|t| {
                    if rng.random_bool(0.3) {
                        random_tags(&mut rng).pop().unwrap_or_else(|| "O".into())
                    } else {
                        t.clone()
                    }
                })
                .collect();
            gold.push(g);
            pred.push(p);
        }
        let prf = f1_score(&gold, &pred).map_err(|e| e.to_string())?;
        let (p, r, f) = set_f1(&gold, &pred);
        let diff = (prf.precision - p)
            .abs()
            .max((prf.recall - r).abs())
            .max((prf.f1 - f).abs());
        worst = worst.max(diff);
        ensure(diff <= 1e-12, || format!("pair {pair}: {prf:?} vs ({p}, {r}, {f})"))?;
    }
    let hand = f1_score(&[vec!["B-PER", "O", "B-LOC"]], &[vec!["B-PER", "O", "O"]]).map_err(|e| e.to_string())?;
    ensure(hand.precision == 1.0 && hand.recall == 0.5, || {
        format!("hand case {hand:?}")
    })?;
    ensure(
        (hand.f1 - 2.0 / 3.0).abs() <= 1e-9 && format!("{:.4}", hand.f1) == "0.6667",
        || format!("hand case F1 {}", hand.f1),
    )?;
    Ok(format!(
        "500 pairs within {worst:.1e}; P=1 R=0.5 gives F1={:.4}",
        hand.f1
    ))
}

fn full_wordnet() -> Check {
    let dir = find_wordnet_dir().ok_or("no WordNet 3.0 dict found (set WNSEARCHDIR)")?;
    let start = Instant::now();
    let store = load_wordnet(&dir).map_err(|e| e.to_string())?;
    let load = start.elapsed();
    let oracle = common::LineScanOracle::new(&dir);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut queries = 0;
    let mut nonempty = 0;
    for pos in WnPos::ALL {
        let lemmas = oracle.single_word_lemmas(pos.file_suffix());
        let sample: Vec<String> = (0..50)
            .map(|i| {
                let w = lemmas[rng.random_range(0..lemmas.len())].clone();
                // Every other query in title case: lookup is case-insensitive.
                if i % 2 == 1 {
                    let mut c = w.chars();
                    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or(w)
                } else {
                    w
                }
            })
            .collect();
        let expected = oracle.synonyms(pos.file_suffix(), &sample);
        for q in &sample {
            let got = store.synonyms(q, pos);
            ensure(got == expected[q], || {
                format!("{q}/{pos}: {got:?} vs {:?}", expected[q])
            })?;
            ensure(!got.iter().any(|s| s.contains('_') || s.contains(' ')), || {
                format!("{q}: multi-word result")
            })?;
            ensure(!got.iter().any(|s| s.eq_ignore_ascii_case(q)), || {
                format!("{q}: returned itself")
            })?;
            queries += 1;
            nonempty += usize::from(!got.is_empty());
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "{queries} queries ({nonempty} with synonyms) match the line scan; {} synsets loaded in {load:.2?}, total {elapsed:.2?}",
        store.synset_count()
    ))
}

fn selection() -> Check {
    let mut checked = 0;
    for i in 0..10_000u64 {
        let s = random_sentence(i, &format!("r{i}"));
        let eligible = non_entity_indices(&s).len();
        let k = (i % 12) as usize;
        let scores = ImportanceScores {
            sentence_id: s.id().into(),
            scores: random_scores(i, s.len()),
        };
        let rescaled = ImportanceScores {
            sentence_id: s.id().into(),
            scores: scores.scores.iter().map(|x| 3.7 * x - 12.5).collect(),
        };
        for method in SelectionMethod::ALL {
            let r = select(method, &s, k, 42, Some(&scores)).map_err(|e| e.to_string())?;
            ensure(r.ranked_indices.iter().all(|&j| !s.tokens()[j].is_entity()), || {
                format!("{method} picked an entity in {}", s.id())
            })?;
            ensure(r.ranked_indices.len() <= k.min(eligible), || {
                format!("{method} ranking too long in {}", s.id())
            })?;
            let again = select(method, &s, k, 42, Some(&scores)).map_err(|e| e.to_string())?;
            ensure(again == r, || format!("{method} not deterministic on {}", s.id()))?;
            if method == SelectionMethod::Gdt {
                let other = select(method, &s, k, 42, Some(&rescaled)).map_err(|e| e.to_string())?;
                ensure(other == r, || {
                    format!("GDT ranking changed under rescaling on {}", s.id())
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} rankings (5 methods x 10000 sentences) satisfy the invariants"
    ))
}

fn toy_attacks() -> Check {
    let start = Instant::now();
    let corpus = toy_corpus();
    let store = load_wordnet(fixture("toy/wordnet")).map_err(|e| e.to_string())?;
    let backend = toy_stub();
    let resources = AttackResources::new(Some(&store), Some(&backend));
    let run = |method, replacer, seed| {
        let config = AttackConfig {
            method,
            replacer,
            budget: 5,
            seed,
            ..AttackConfig::default()
        };
        attack_corpus(&corpus, &config, resources, 4).map_err(|e| e.to_string())
    };
    let mut total = 0;
    for method in SelectionMethod::ALL {
        for replacer in ReplacerKind::ALL {
            let a = run(method, replacer, 42)?;
            for (o, p) in corpus.sentences().iter().zip(a.corpus.sentences()) {
                let changed = o
                    .tokens()
                    .iter()
                    .zip(p.tokens())
                    .filter(|(x, y)| x.form != y.form)
                    .count();
                ensure(changed <= 5, || {
                    format!("{method}+{replacer}: {} has {changed} changes", o.id())
                })?;
                ensure(o.ner_tags() == p.ner_tags(), || {
                    format!("{method}+{replacer}: NER column changed in {}", o.id())
                })?;
                total += changed;
            }
            let b = run(method, replacer, 42)?;
            ensure(
                serialize_conll(&a.corpus) == serialize_conll(&b.corpus)
                    && replacement_log(&a.examples) == replacement_log(&b.examples),
                || format!("{method}+{replacer}: seed 42 runs differ"),
            )?;
            if method == SelectionMethod::Rdm {
                let c = run(method, replacer, 43)?;
                ensure(serialize_conll(&a.corpus) != serialize_conll(&c.corpus), || {
                    format!("{method}+{replacer}: seed 43 equals seed 42")
                })?;
            }
        }
    }
    let noop = evaluate_attack(&corpus, &corpus, None, &backend, EvalOptions::default()).map_err(|e| e.to_string())?;
    ensure(noop.mean_similarity == 1.0 && noop.delta_perf == 0.0, || {
        format!("no-op gave Sim={} dPerf={}", noop.mean_similarity, noop.delta_perf)
    })?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "10 combinations, {total} replacements, reproducible; no-op Sim=1 dPerf=0; {elapsed:.2?}"
    ))
}

fn similarity_over_http() -> Check {
    let server = serve_stub(StubConfig::default(), "127.0.0.1:0").map_err(|e| e.to_string())?;
    let client = Client::connect(&server.url()).map_err(|e| e.to_string())?;
    let mut used = HashSet::new();
    let words: Vec<String> = (0..)
        .map(|i| format!("tok{i}"))
        .filter(|w| used.insert(stable_hash(w) % 4096))
        .take(5)
        .collect();
    let sentence = |forms: &[String]| {
        Sentence::new(
            "a",
            forms
                .iter()
                .enumerate()
                .map(|(i, f)| nerperturb_core::Token {
                    index: i,
                    form: f.clone(),
                    upos: "X".into(),
                    chunk: "O".into(),
                    head: 0,
                    deprel: "dep".into(),
                    ner: "O".into(),
                })
                .collect(),
        )
        .unwrap()
    };
    let original = Corpus::new("o", vec![sentence(&words[..4])]).unwrap();
    let mut changed = words[..4].to_vec();
    changed[1] = words[4].clone();
    let perturbed = Corpus::new("p", vec![sentence(&changed)]).unwrap();
    let sim = nerperturb_core::evaluation::similarity_scores(&original, &perturbed, &client, &EvalOptions::default())
        .map_err(|e| e.to_string())?[0];
    ensure((sim - 0.75).abs() <= 1e-9, || {
        format!("similarity {sim}, expected 0.75")
    })?;
    Ok(format!("n=4 m=1 over HTTP gives {sim}"))
}

fn poison_delta() -> Check {
    let backend = common::stub_client(StubConfig {
        lexicon: toy_lexicon(),
        poison_token: Some("zzpoison".into()),
        ..StubConfig::default()
    });
    let corpus = toy_corpus();
    let poisoned: BTreeSet<&str> = ["toy-001", "toy-011", "toy-025"].into();
    let mut lost = 0;
    let sentences = corpus
        .sentences()
        .iter()
        .map(|s| {
            if !poisoned.contains(s.id()) {
                return s.clone();
            }
            lost += s.spans().len();
            let mut tokens = s.tokens().to_vec();
            let slot = tokens.iter().position(|t| !t.is_entity()).unwrap();
            tokens[slot].form = "zzpoison".into();
            Sentence::new(s.id(), tokens).unwrap()
        })
        .collect();
    let adversarial = Corpus::new("adv", sentences).unwrap();
    let report =
        evaluate_attack(&corpus, &adversarial, None, &backend, EvalOptions::default()).map_err(|e| e.to_string())?;
    // toy-001: 1 entity, toy-011: 2, toy-025 (New Zealand ... Olympic): 2.
    // 75 gold entities, 5 lost: P = 1, R = 70/75, F1 = 2R/(1+R) = 28/29.
    ensure(lost == 5, || format!("expected to poison 5 entities, poisoned {lost}"))?;
    let expected = 1.0 - 28.0 / 29.0;
    ensure((report.delta_perf - expected).abs() <= 1e-9, || {
        format!("dPerf {} expected {expected}", report.delta_perf)
    })?;
    Ok(format!("dPerf={:.12} = 1/29", report.delta_perf))
}

fn budget_sweep() -> Check {
    let corpus = toy_corpus();
    let store = load_wordnet(fixture("toy/wordnet")).map_err(|e| e.to_string())?;
    let backend = toy_stub();
    let plan = SweepPlan {
        jobs: 4,
        ..SweepPlan::default()
    };
    let rows = run_sweep(
        &corpus,
        None,
        &plan,
        AttackResources::new(Some(&store), Some(&backend)),
        &backend,
        EvalOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    for method in SelectionMethod::ALL {
        for replacer in ReplacerKind::ALL {
            let mine: Vec<_> = rows
                .iter()
                .filter(|r| r.method == method.to_string() && r.replacer == replacer.to_string())
                .collect();
            ensure(mine.len() == 9, || format!("{method}+{replacer}: {} rows", mine.len()))?;
            ensure(mine.iter().map(|r| r.budget).eq(1..=9), || {
                format!("{method}+{replacer}: budgets out of order")
            })?;
            if replacer == ReplacerKind::Synonym {
                let counts: Vec<usize> = mine.iter().map(|r| r.replacements).collect();
                ensure(counts.windows(2).all(|w| w[0] <= w[1]), || {
                    format!("{method}+synonym counts {counts:?} decrease")
                })?;
            }
        }
    }
    Ok(format!(
        "{} rows, 9 per combination; synonym counts non-decreasing",
        rows.len()
    ))
}

type NamedCheck = (&'static str, fn() -> Check);

fn main() {
    let checks: [NamedCheck; 9] = [
        ("CoNLL round trip", roundtrip),
        ("span decoding", span_decoding),
        ("entity F1", f1_oracle),
        ("WordNet synonyms", full_wordnet),
        ("selection invariants", selection),
        ("toy attacks", toy_attacks),
        ("stub similarity", similarity_over_http),
        ("poisoned dPerf", poison_delta),
        ("budget sweep", budget_sweep),
    ];
    let mut failed = 0;
    for (n, (name, check)) in checks.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", n + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name}: {reason}", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
