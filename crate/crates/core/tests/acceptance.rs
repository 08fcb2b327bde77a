//! End-to-end acceptance checks at the default sweep size. Each test prints
//! one `PASS`/`FAIL` line and then asserts.

use std::io::Write;
use std::sync::OnceLock;

use relevance_sim::engine::run_episode_observed;
use relevance_sim::harness::{
    emit_csv, render_csv, run_sweep, run_sweep_with_threads, Estimate, ResultRow, ResultTable,
};
use relevance_sim::oracle::run_oracle_suite;
use relevance_sim::relevance::{build_relevance_functions, RelevanceParams};
use relevance_sim::rng::{episode_stream, seeded};
use relevance_sim::scenario::{Point, Scenario, SceneConfig};
use relevance_sim::schemes::{
    estimate_receiver_known, estimation_error, sample_estimated_value, EstimationModel,
    IntervalClipping,
};
use relevance_sim::{ExperimentSpec, Mode, ObjectSet, Preset, SchemeKind};

use SchemeKind::{Baseline, IdealSemantic, Irc, Rm, Semantic};

const AGNOSTIC: [SchemeKind; 3] = [Rm, Irc, Baseline];

// Tolerances.
const LOCAL_SET_TARGET: f64 = 15.0;
const LOCAL_SET_TOL: f64 = 2.0;
const SE_GAIN_BAND: (f64, f64) = (1.5, 2.5);
const RM_OVER_IDEAL: f64 = 3.9;
const RM_OVER_SEMANTIC: f64 = 1.6;
const SIZE_RATIO_TOL: f64 = 0.30;
const USAGE_TOL: f64 = 0.10;
const HRR_GAIN_BAND: (f64, f64) = (0.25, 0.50);
const BROADCAST_SE_TOL: f64 = 0.25;
const ORACLE_INSTANCES: usize = 1000;

fn unicast_spec() -> ExperimentSpec {
    Preset::Fig5.spec()
}

fn broadcast_spec() -> ExperimentSpec {
    Preset::Fig8.spec()
}

fn unicast() -> &'static ResultTable {
    static TABLE: OnceLock<ResultTable> = OnceLock::new();
    TABLE.get_or_init(|| run_sweep(&unicast_spec()).expect("unicast sweep"))
}

fn broadcast() -> &'static ResultTable {
    static TABLE: OnceLock<ResultTable> = OnceLock::new();
    TABLE.get_or_init(|| run_sweep(&broadcast_spec()).expect("broadcast sweep"))
}

fn row(table: &ResultTable, scheme: SchemeKind, gamma: usize) -> &ResultRow {
    table
        .row(scheme, gamma)
        .unwrap_or_else(|| panic!("missing row {scheme} {gamma}"))
}

fn value(e: Estimate) -> f64 {
    e.value.expect("metric has data")
}

fn mean_message_size(r: &ResultRow) -> f64 {
    r.pooled.variables as f64 / r.pooled.messages as f64
}

fn within_rel(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol * target
}

fn report(id: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {id:>2}: {verdict}: {detail}");
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_ideal_semantic_sends_nothing_irrelevant() {
    let mut offenders = Vec::new();
    for (mode, table) in [(Mode::Unicast, unicast()), (Mode::Broadcast, broadcast())] {
        for gamma in 1..=25 {
            let lrr = row(table, IdealSemantic, gamma).lrr.value;
            if lrr != Some(0.0) {
                offenders.push(format!("{mode} gamma {gamma}: {lrr:?}"));
            }
        }
    }
    report(
        1,
        offenders.is_empty(),
        format!("IdealSemantic LRR is exactly 0 at all budgets, offenders {offenders:?}"),
    );
}

#[test]
fn criterion_02_local_set_size() {
    let mut config = unicast_spec().episode_config(Baseline, 25);
    config.slots = 400;
    let (mut total, mut count) = (0usize, 0usize);
    for rep in 0..200 {
        let mut rng = episode_stream(7, Mode::Unicast, Baseline, 25, rep).unwrap();
        run_episode_observed(&config, &mut rng, |t, _| {
            total += t.local_set_size;
            count += 1;
        })
        .unwrap();
    }
    let mean = total as f64 / count as f64;
    report(
        2,
        (mean - LOCAL_SET_TARGET).abs() <= LOCAL_SET_TOL,
        format!("mean local set size {mean:.3} (target {LOCAL_SET_TARGET} +/- {LOCAL_SET_TOL})"),
    );
}

#[test]
fn criterion_03_unicast_semantic_efficiency_gain() {
    let t = unicast();
    let ratios: Vec<(usize, f64)> = (1..=25)
        .map(|g| (g, value(row(t, Semantic, g).se) / value(row(t, Baseline, g).se)))
        .collect();
    let outside: Vec<String> = ratios
        .iter()
        .filter(|(_, r)| !(SE_GAIN_BAND.0..=SE_GAIN_BAND.1).contains(r))
        .map(|(g, r)| format!("{g}:{r:.2}"))
        .collect();
    let lo = ratios.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().map(|x| x.1).fold(0.0, f64::max);
    report(
        3,
        outside.is_empty(),
        format!(
            "Semantic/Baseline SE in [{lo:.2}, {hi:.2}], band {SE_GAIN_BAND:?}, out of band (gamma:ratio) {outside:?}"
        ),
    );
}

#[test]
fn criterion_04_unicast_message_size_ratios() {
    let t = unicast();
    let avg = |s| (21..=25).map(|g| mean_message_size(row(t, s, g))).sum::<f64>() / 5.0;
    let (rm, sem, ideal) = (avg(Rm), avg(Semantic), avg(IdealSemantic));
    let (r_ideal, r_sem) = (rm / ideal, rm / sem);
    report(
        4,
        within_rel(r_ideal, RM_OVER_IDEAL, SIZE_RATIO_TOL) && within_rel(r_sem, RM_OVER_SEMANTIC, SIZE_RATIO_TOL),
        format!(
            "gamma 21-25 sizes RM {rm:.2}, Semantic {sem:.2}, Ideal {ideal:.2}; RM/Ideal {r_ideal:.2} (target {RM_OVER_IDEAL}), RM/Semantic {r_sem:.2} (target {RM_OVER_SEMANTIC}), tolerance {SIZE_RATIO_TOL}"
        ),
    );
}

#[test]
fn criterion_05_broadcast_reduces_estimation_error() {
    let (u, b) = (unicast(), broadcast());
    let bad: Vec<usize> = (1..=25)
        .filter(|&g| {
            let eu = row(u, Semantic, g).mean_eps.unwrap();
            let eb = row(b, Semantic, g).mean_eps.unwrap();
            eb >= eu
        })
        .collect();
    let mean = |t| (1..=25).map(|g| row(t, Semantic, g).mean_eps.unwrap()).sum::<f64>() / 25.0;
    report(
        5,
        bad.is_empty(),
        format!(
            "mean eps unicast {:.3} vs broadcast {:.3}; budgets without reduction {bad:?}",
            mean(u),
            mean(b)
        ),
    );
}

#[test]
fn criterion_06_usage_checkpoints() {
    let checkpoints = [
        (Mode::Unicast, Semantic, 10, 0.79),
        (Mode::Unicast, Semantic, 15, 0.55),
        (Mode::Broadcast, Semantic, 10, 0.66),
        (Mode::Broadcast, Semantic, 15, 0.45),
        (Mode::Unicast, IdealSemantic, 10, 0.35),
        (Mode::Unicast, IdealSemantic, 15, 0.23),
        (Mode::Broadcast, IdealSemantic, 10, 0.58),
        (Mode::Broadcast, IdealSemantic, 15, 0.39),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (mode, scheme, gamma, target) in checkpoints {
        let table = match mode {
            Mode::Unicast => unicast(),
            Mode::Broadcast => broadcast(),
        };
        let got = value(row(table, scheme, gamma).usage);
        let ok = (got - target).abs() <= USAGE_TOL;
        pass &= ok;
        parts.push(format!("{mode} {scheme} {gamma}: {got:.3}/{target}{}", if ok { "" } else { " (!)" }));
    }
    report(6, pass, parts.join("; "));
}

#[test]
fn criterion_07_hrr_ordering_and_broadcast_gain() {
    let t = unicast();
    let mut problems = Vec::new();
    for g in 1..=10 {
        let ideal = row(t, IdealSemantic, g).hrr;
        let sem = row(t, Semantic, g).hrr;
        // "Ideal >= Semantic": Ideal is not significantly below Semantic.
        if value(ideal) + ideal.ci.unwrap() + sem.ci.unwrap() < value(sem) {
            problems.push(format!("gamma {g}: Ideal {:.4} below Semantic {:.4}", value(ideal), value(sem)));
        }
        for s in AGNOSTIC {
            let other = value(row(t, s, g).hrr);
            if value(sem) <= other {
                problems.push(format!("gamma {g}: Semantic {:.4} not above {s} {other:.4}", value(sem)));
            }
        }
        for (i, a) in AGNOSTIC.iter().enumerate() {
            for b in &AGNOSTIC[i + 1..] {
                if !row(t, *a, g).hrr.overlaps(&row(t, *b, g).hrr) {
                    problems.push(format!("gamma {g}: {a} and {b} HRR intervals disjoint"));
                }
            }
        }
    }

    let b = broadcast();
    let gains: Vec<f64> = (1..=10)
        .map(|g| {
            let agnostic = AGNOSTIC.iter().map(|&s| value(row(b, s, g).hrr)).sum::<f64>() / 3.0;
            value(row(b, Semantic, g).hrr) / agnostic - 1.0
        })
        .collect();
    let (best_gamma, best) = gains
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i + 1, x) } else { acc });
    if !(HRR_GAIN_BAND.0..=HRR_GAIN_BAND.1).contains(&best) {
        problems.push(format!("broadcast peak gain {best:.3} outside {HRR_GAIN_BAND:?}"));
    }
    report(
        7,
        problems.is_empty(),
        format!(
            "unicast ordering over gamma 1-10; broadcast peak Semantic HRR gain {:.1}% at gamma {best_gamma}; problems {problems:?}",
            best * 100.0
        ),
    );
}

#[test]
fn criterion_08_broadcast_se_ratios() {
    let t = broadcast();
    let se = |s, g| value(row(t, s, g).se);
    let mut problems = Vec::new();
    let (mut ideal_rm, mut sem_rm) = (Vec::new(), Vec::new());
    let (mut over_base, mut over_irc) = (0.0f64, 0.0f64);
    for g in 1..=25 {
        ideal_rm.push(se(IdealSemantic, g) / se(Rm, g));
        sem_rm.push(se(Semantic, g) / se(Rm, g));
        for s in [IdealSemantic, Semantic] {
            over_base = over_base.max(se(s, g) / se(Baseline, g));
            over_irc = over_irc.max(se(s, g) / se(Irc, g));
        }
    }
    for (name, ratios, target) in [("Ideal/RM", &ideal_rm, 2.0), ("Semantic/RM", &sem_rm, 1.8)] {
        for (i, &r) in ratios.iter().enumerate() {
            if !within_rel(r, target, BROADCAST_SE_TOL) {
                problems.push(format!("{name} gamma {}: {r:.2}", i + 1));
            }
        }
    }
    if !within_rel(over_base, 2.8, BROADCAST_SE_TOL) {
        problems.push(format!("peak gain over Baseline {over_base:.2}"));
    }
    if !within_rel(over_irc, 2.4, BROADCAST_SE_TOL) {
        problems.push(format!("peak gain over IRC {over_irc:.2}"));
    }
    let range = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        format!("[{lo:.2}, {hi:.2}]")
    };
    report(
        8,
        problems.is_empty(),
        format!(
            "Ideal/RM {} (2.0), Semantic/RM {} (1.8), peak over Baseline {over_base:.2} (2.8), over IRC {over_irc:.2} (2.4), tolerance {BROADCAST_SE_TOL}; problems {problems:?}",
            range(&ideal_rm),
            range(&sem_rm)
        ),
    );
}

#[test]
fn criterion_09_ideal_selector_matches_exhaustive_search() {
    let r = run_oracle_suite(ORACLE_INSTANCES, 20_240_601);
    report(
        9,
        r.passed() && r.instances == ORACLE_INSTANCES,
        format!("{} instances, {} mismatches", r.instances, r.mismatches.len()),
    );
}

#[test]
fn criterion_10_deterministic_output() {
    let first = render_csv(unicast());
    let again = run_sweep_with_threads(&unicast_spec(), 2).expect("rerun");
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_csv(unicast(), &a).unwrap();
    emit_csv(&again, &b).unwrap();
    let same_bytes = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    report(
        10,
        same_bytes && first == render_csv(&again),
        format!("unicast preset rerun with the same seed, {} bytes, identical {same_bytes}", first.len()),
    );
}

#[test]
fn criterion_11_invariants() {
    let mut failures = Vec::new();

    // Budget, RM disjointness and the knowledge union along real episodes.
    for (mode, vehicles) in [(Mode::Unicast, 2), (Mode::Broadcast, 4)] {
        for scheme in SchemeKind::ALL {
            for gamma in [1, 3, 8, 25] {
                let mut spec = match mode {
                    Mode::Unicast => unicast_spec(),
                    Mode::Broadcast => broadcast_spec(),
                };
                spec.scene.vehicle_count = vehicles;
                let config = spec.episode_config(scheme, gamma);
                let mut rng = seeded(gamma as u64 * 31 + scheme.index() as u64);
                let mut state = config.initial_state(&mut rng).unwrap();
                let mut last: Vec<Option<(usize, ObjectSet)>> = vec![None; vehicles];
                for _ in 0..60 {
                    let estimated = estimate_receiver_known(&state.channel, state.slot);
                    let t = state.run_slot(&mut rng);
                    if t.message.variables.len() > gamma {
                        failures.push(format!("budget {scheme} {gamma}"));
                    }
                    if scheme == Rm && !t.message.variables.is_disjoint(&estimated) {
                        failures.push(format!("RM resent redundant at gamma {gamma}"));
                    }
                    last[t.transmitter] = Some((t.slot, t.message.variables.clone()));
                    for kb in &state.knowledge {
                        let mut expected = kb.local_snapshot.clone();
                        for (sender, entry) in last.iter().enumerate() {
                            if let Some((slot, vars)) = entry {
                                if sender != kb.owner && t.slot - slot < vehicles {
                                    expected.union_with(vars);
                                }
                            }
                        }
                        if kb.known_set() != expected {
                            failures.push(format!("knowledge union {scheme} slot {}", t.slot));
                        }
                    }
                }
            }
        }
    }

    // Estimation error is non-increasing in knowledge.
    let model = EstimationModel::default();
    if (0..200).any(|k| estimation_error(k + 1, &model) > estimation_error(k, &model)) {
        failures.push("eps not monotone".into());
    }

    // Estimates stay inside the clipped interval; zero error is the identity.
    let mut rng = seeded(3);
    for clipping in [IntervalClipping::Clamp, IntervalClipping::Truncate] {
        let m = EstimationModel { clipping, ..EstimationModel::default() };
        for i in 0..=20 {
            let w = i as f64 / 20.0;
            for j in 0..=10 {
                let eps = j as f64 / 10.0;
                let (lo, hi) = ((w - eps / 2.0).max(0.0), (w + eps / 2.0).min(1.0));
                for _ in 0..50 {
                    let v = sample_estimated_value(w, eps, &m, &mut rng);
                    if v < lo - 1e-12 || v > hi + 1e-12 {
                        failures.push(format!("estimate {v} outside [{lo}, {hi}]"));
                    }
                }
            }
            if sample_estimated_value(w, 0.0, &m, &mut rng) != w {
                failures.push(format!("eps = 0 changed {w}"));
            }
        }
    }

    // High-class marginal within three binomial standard deviations.
    let params = RelevanceParams::default();
    let scene = SceneConfig { vehicle_count: 4, ..SceneConfig::default() };
    let mut highs = [0usize; 4];
    let trials = 1500;
    for _ in 0..trials {
        let s = Scenario::generate(&scene, &mut rng).unwrap();
        for (h, f) in highs.iter_mut().zip(build_relevance_functions(&s, &params, &mut rng)) {
            *h += f.high_set().len();
        }
    }
    let n = (trials * scene.object_count) as f64;
    let p = 1.0 - params.delta_l;
    for (v, &h) in highs.iter().enumerate() {
        if (h as f64 - n * p).abs() > 3.0 * (n * p * (1.0 - p)).sqrt() {
            failures.push(format!("vehicle {v} marginal {}", h as f64 / n));
        }
    }

    // Class agreement does not grow with distance.
    let mut agreement = Vec::new();
    for d in [0.0, 120.0, 240.0, 360.0, 480.0] {
        let mut rng = seeded(99);
        let (mut agree, mut total) = (0usize, 0usize);
        for _ in 0..2000 {
            let mut s = Scenario::generate(&SceneConfig::default(), &mut rng).unwrap();
            s.vehicles[0].position = Point::new(0.0, 100.0);
            s.vehicles[1].position = Point::new(d, 100.0);
            let f = build_relevance_functions(&s, &params, &mut rng);
            for k in 0..s.object_count() {
                agree += usize::from(f[0].is_high(k) == f[1].is_high(k));
                total += 1;
            }
        }
        agreement.push(agree as f64 / total as f64);
    }
    if agreement.windows(2).any(|w| w[1] > w[0]) {
        failures.push(format!("agreement not monotone {agreement:?}"));
    }

    report(
        11,
        failures.is_empty(),
        format!(
            "budget, RM disjointness, knowledge union, eps monotone, estimate interval, marginal, agreement {:?}; failures {:?}",
            agreement.iter().map(|a| (a * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            failures.iter().take(5).collect::<Vec<_>>()
        ),
    );
}
