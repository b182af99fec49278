use std::sync::Arc;

use flad_core::datagen::{AttackLibrary, DatasetSplit, FlowSample, FLOW_WIDTH};
use flad_core::federation::*;
use flad_core::harness::{client_datasets, load_library, normalize, ClientPool, ExperimentConfig, StrategyConfig};
use flad_core::nn::ModelParams;
use flad_core::Result;

const DIMS: [usize; 4] = [110, 8, 8, 1];

fn separable_client(id: &str, n: usize) -> ClientState {
    let mk = |i: usize| {
        let y = (i % 2) as u8;
        let mut f = vec![0.0; FLOW_WIDTH];
        f[0] = if y == 1 { 0.8 } else { 0.2 } + (i % 7) as f32 * 0.01;
        f[1] = 0.5;
        FlowSample::new(f, y, if y == 1 { "toy" } else { "benign" }).unwrap()
    };
    let split = DatasetSplit {
        train: (0..n).map(mk).collect(),
        validation: (n..n + n / 4).map(mk).collect(),
        test: (0..4).map(mk).collect(),
    };
    ClientState::new(id, Arc::new(ClientData::from_split(&split)), &TimingModel::default(), 3).unwrap()
}

fn small_federation(seed: u64) -> (ClientPool, ExperimentConfig) {
    let mut cfg = ExperimentConfig { seed, ..ExperimentConfig::default() };
    cfg.data.attacks = Some(["WebDDoS", "LDAP", "Syn", "DNS", "NTP"].map(String::from).to_vec());
    cfg.data.base_count = 20;
    cfg.data.max_per_class = 160;
    let lib = load_library(&cfg).unwrap();
    let splits = normalize(&client_datasets(&cfg, &lib.library).unwrap(), true);
    (ClientPool::new(&splits, &lib.library), cfg)
}

fn clients_for(pool: &ClientPool, strategy: &StrategyConfig) -> Vec<ClientState> {
    let all: Vec<usize> = (0..pool.len()).collect();
    pool.clients(&all, strategy, &TimingModel::default(), 17).unwrap()
}

fn hp(rounds: u32) -> FlHyperParams {
    FlHyperParams { patience: 3, max_rounds: Some(rounds), ..FlHyperParams::default() }
}

#[test]
fn stagnation_stops_after_patience_plus_one_rounds() {
    let mut clients: Vec<ClientState> = (0..3).map(|i| separable_client(&format!("c{i}"), 8)).collect();
    let eval = |round: u32, _: usize, _: &ClientState, _: &ModelParams| -> Result<f64> {
        Ok(f64::from(round.min(7)) / 10.0)
    };
    let hp = FlHyperParams { patience: 25, ..FlHyperParams::default() };
    let flad = Flad::new(&hp).unwrap();
    let mut seen = Vec::new();
    let out = run_federation_with(
        &mut clients,
        &flad,
        &hp,
        &RunOptions::new(1, &DIMS),
        &eval,
        &mut |r| {
            seen.push(r.round);
            Ok(())
        },
    )
    .unwrap();
    assert_eq!(out.reports.len(), 33);
    assert_eq!(seen, (1..=33).collect::<Vec<_>>());
    assert_eq!(out.best_round, 7);
    assert!(!out.reports.last().unwrap().truncated);
    assert_eq!(out.reports.last().unwrap().stop_counter, 26);
}

#[test]
fn round_cap_marks_truncation() {
    let mut clients = vec![separable_client("a", 8)];
    let eval = |round: u32, _: usize, _: &ClientState, _: &ModelParams| -> Result<f64> { Ok(f64::from(round) / 100.0) };
    let hp = FlHyperParams { max_rounds: Some(5), ..FlHyperParams::default() };
    let out = run_federation_with(&mut clients, &Flad::new(&hp).unwrap(), &hp, &RunOptions::new(1, &DIMS), &eval, &mut |_| Ok(()))
        .unwrap();
    assert_eq!(out.reports.len(), 5);
    assert!(out.reports[4].truncated);
    assert!(out.summary().truncated);
}

#[test]
fn single_client_learns_separable_data() {
    let mut clients = vec![separable_client("solo", 64)];
    let hp = FlHyperParams { learning_rate: 0.1, patience: 5, max_rounds: Some(100), ..FlHyperParams::default() };
    let out = run_federation(&mut clients, &Flad::new(&hp).unwrap(), &hp, &RunOptions::new(2, &DIMS)).unwrap();
    assert!(out.reports.iter().any(|r| r.mean_accuracy >= 0.99));
}

#[test]
fn reports_satisfy_selection_time_and_budget_invariants() {
    let (pool, _) = small_federation(4);
    let mut clients = clients_for(&pool, &StrategyConfig::named("flad"));
    let hp = hp(25);
    let opts = RunOptions::new(8, &[110, 32, 32, 1]);
    let out = run_federation(&mut clients, &Flad::new(&hp).unwrap(), &hp, &opts).unwrap();
    let reports = &out.reports;
    assert_eq!(reports.iter().map(|r| r.round).collect::<Vec<_>>(), (1..=reports.len() as u32).collect::<Vec<_>>());
    let mut total = 0.0;
    let mut budget = 0;
    for (t, r) in reports.iter().enumerate() {
        let acc: Vec<f64> = r.clients.iter().map(|c| c.accuracy).collect();
        let naive = acc.iter().sum::<f64>() / acc.len() as f64;
        assert!((r.mean_accuracy - naive).abs() <= 1e-9);
        let brute = clients
            .iter()
            .zip(&r.clients)
            .filter(|(_, rec)| rec.selected)
            .map(|(c, rec)| c.network_time + (rec.epochs as u64 * rec.steps as u64) as f64 * c.step_time)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.round_seconds, brute);
        total += r.round_seconds;
        assert_eq!(r.cumulative_seconds, total);
        budget += r.clients.iter().map(|c| c.epochs as u64 * c.steps as u64).sum::<u64>();
        assert_eq!(r.cumulative_step_budget, budget);
        if t == 0 {
            assert!(r.clients.iter().all(|c| c.selected && c.epochs == 5 && c.steps == 1000));
            continue;
        }
        let prev = &reports[t - 1];
        for (p, c) in prev.clients.iter().zip(&r.clients) {
            assert_eq!(c.selected, p.accuracy <= prev.mean_accuracy, "round {}", r.round);
            if c.selected {
                assert!((1..=5).contains(&c.epochs) && (10..=1000).contains(&c.steps));
            }
        }
    }
    // The returned model is the best round's aggregate.
    let best = &reports[out.best_round as usize - 1];
    let again: Vec<f64> = clients.iter().map(|c| evaluate_client(c, &out.best_model).unwrap()).collect();
    assert!((mean_accuracy(&again) - best.mean_accuracy).abs() <= 1e-9);
    assert!(reports.iter().all(|r| r.mean_accuracy <= best.mean_accuracy));
}

fn jsonl(pool: &ClientPool, strategy: &StrategyConfig, parallel: bool) -> String {
    let mut clients = clients_for(pool, strategy);
    let h = strategy.hyper_params(&hp(6));
    let registry = StrategyRegistry::with_builtins();
    let s = registry.build(&strategy.name, &h).unwrap();
    let opts = RunOptions { parallel, ..RunOptions::new(21, &[110, 16, 16, 1]) };
    reports_to_jsonl(&run_federation(&mut clients, s.as_ref(), &h, &opts).unwrap().reports)
}

#[test]
fn report_streams_are_deterministic_and_order_independent() {
    let (pool, _) = small_federation(5);
    for s in [StrategyConfig::named("flad"), StrategyConfig::named("flddos").with_fixed(2, 20)] {
        let a = jsonl(&pool, &s, false);
        assert_eq!(a, jsonl(&pool, &s, false));
        assert_eq!(a, jsonl(&pool, &s, true));
    }
}

#[test]
fn flddos_with_unit_gamma_reproduces_fedavg() {
    let (pool, _) = small_federation(6);
    let mut flddos = StrategyConfig::named("flddos").with_fixed(2, 25);
    flddos.tcp_gamma = 1.0;
    let fedavg = StrategyConfig::named("fedavg").with_fixed(2, 25);
    assert_eq!(jsonl(&pool, &flddos, false), jsonl(&pool, &fedavg, false));
    let mut personalised = flddos.clone();
    personalised.tcp_gamma = 0.9;
    assert_ne!(jsonl(&pool, &personalised, false), jsonl(&pool, &fedavg, false));
}

#[test]
fn baselines_train_the_configured_fraction() {
    let (pool, _) = small_federation(7);
    let s = StrategyConfig::named("fedavg").with_fixed(1, 50);
    let mut clients = clients_for(&pool, &s);
    let h = FlHyperParams { early_stopping: false, ..s.hyper_params(&hp(4)) };
    let out = run_federation(&mut clients, &FedAvg::new(&h).unwrap(), &h, &RunOptions::new(3, &[110, 8, 8, 1])).unwrap();
    assert_eq!(out.reports.len(), 4);
    for r in &out.reports {
        assert_eq!(r.selected.len(), 4);
        for (c, rec) in clients.iter().zip(&r.clients) {
            if rec.selected {
                assert_eq!(rec.steps as usize, c.train_len().div_ceil(50));
            }
        }
    }
    let w = fedavg_weights(&clients.iter().map(|c| c.train_len() as u64).collect::<Vec<_>>()).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

#[test]
fn library_tcp_attacks_get_personalised() {
    let (pool, _) = small_federation(8);
    let lib = AttackLibrary::builtin();
    let clients = clients_for(&pool, &StrategyConfig::named("flddos"));
    for c in &clients {
        let tcp = lib.attack.iter().any(|a| a.name == c.id && a.protocol == flad_core::datagen::Transport::Tcp);
        assert_eq!(c.gamma, if tcp { 0.9 } else { 1.0 }, "{}", c.id);
    }
}
