//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any of them fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use activecanvas::harness::scenario::{reference_dataset, lazy_dataset, median, with_and_without_commits};
use activecanvas::harness::{simulate, SimulatedUser, Strategy};
use activecanvas_core::features::rank_features;
use activecanvas_core::layout::ItemPosition;
use activecanvas_core::mi::{estimate_mi, jitter_columns, KsgEstimator, SampleBlock, DEFAULT_JITTER};
use activecanvas_core::refiner::refine_positions;
use activecanvas_core::{EngineConfig, FeatureMatrix, Layout, Workspace, WorkspaceStore};
use activecanvas_service::transcript::{self, mask_timing, parse, replies_after, Step, FIXTURE_DATASET};
use activecanvas_service::AppState;
use futures_util::{SinkExt, StreamExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tokio_tungstenite::tungstenite::Message;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gaussian(n: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (a, rho * a + (1.0 - rho * rho).sqrt() * b)
        })
        .unzip()
}

fn col(v: &[f64]) -> SampleBlock {
    SampleBlock::from_column(v).unwrap()
}

fn mi(x: &[f64], y: &[f64]) -> f64 {
    estimate_mi(&col(x), &col(y), 3, 0).unwrap().nats
}

fn mi_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, rho) in [0.0, 0.5, 0.9].into_iter().enumerate() {
        let (x, y) = gaussian(2000, rho, 100 + i as u64);
        let truth = -0.5 * (1.0 - rho * rho).ln();
        let err = (mi(&x, &y) - truth).abs();
        worst = worst.max(err);
        parts.push(format!("rho={rho} err={err:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 0.10 && secs < 5.0,
        format!("{} (tol 0.10), {secs:.2}s (limit 5s)", parts.join(", ")),
    )
}

fn invariance() -> Outcome {
    let transforms: [(&str, fn(f64) -> f64); 2] = [("affine", |v| 2.0 * v + 1.0), ("cubic", |v| v * v * v + v)];
    let mut worst: f64 = 0.0;
    let mut symmetric = true;
    for (i, rho) in [0.5, 0.7, 0.9].into_iter().enumerate() {
        let (x, y) = gaussian(2000, rho, 300 + i as u64);
        let base = mi(&x, &y);
        symmetric &= base.to_bits() == mi(&y, &x).to_bits();
        for (_, f) in transforms {
            let tx: Vec<f64> = x.iter().map(|&v| f(v)).collect();
            let ty: Vec<f64> = y.iter().map(|&v| f(v)).collect();
            worst = worst.max((mi(&tx, &y) - base).abs());
            worst = worst.max((mi(&x, &ty) - base).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a: Vec<[f64; 3]> = (0..500).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let b: Vec<[f64; 2]> = a.iter().map(|r| [r[0] + r[1], rng.random::<f64>() * r[2]]).collect();
    let (a, b) = (SampleBlock::from_rows(&a).unwrap(), SampleBlock::from_rows(&b).unwrap());
    let ab = estimate_mi(&a, &b, 3, 5).unwrap().nats;
    let ba = estimate_mi(&b, &a, 3, 5).unwrap().nats;
    symmetric &= ab.to_bits() == ba.to_bits();
    check(
        worst <= 0.05 && symmetric,
        format!("max shift {worst:.4} nats (tol 0.05), symmetry bit-exact: {symmetric}"),
    )
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn psi(m: usize) -> f64 {
    -EULER_GAMMA + (1..m).map(|j| 1.0 / j as f64).sum::<f64>()
}

fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn jittered(block: &SampleBlock, seed: u64) -> Vec<Vec<f64>> {
    let amps: Vec<f64> = block
        .column_std()
        .into_iter()
        .map(|s| if s > 0.0 { DEFAULT_JITTER * s } else { DEFAULT_JITTER })
        .collect();
    let j = jitter_columns(block, &amps, seed);
    (0..j.rows()).map(|i| j.row(i).to_vec()).collect()
}

fn brute_ksg(xs: &[Vec<f64>], ys: &[Vec<f64>], k: usize) -> f64 {
    let n = xs.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut joint: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| max_norm(&xs[i], &xs[j]).max(max_norm(&ys[i], &ys[j])))
            .collect();
        joint.sort_by(f64::total_cmp);
        let eps = joint[k - 1];
        let nx = (0..n).filter(|&j| j != i && max_norm(&xs[i], &xs[j]) < eps).count();
        let ny = (0..n).filter(|&j| j != i && max_norm(&ys[i], &ys[j]) < eps).count();
        acc += psi(nx + 1) + psi(ny + 1);
    }
    psi(k) + psi(n) - acc / n as f64
}

fn ranking_instance(seed: u64, informative: usize) -> (FeatureMatrix, Layout) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 60;
    let mut cols: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let signal: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    cols[informative] = signal.iter().map(|s| 3.0 * s - 1.0).collect();
    let items = (0..n)
        .map(|i| {
            let noise: f64 = rng.sample(StandardNormal);
            ItemPosition {
                id: format!("img_{i:03}"),
                x: (signal[i] + 0.03 * noise).clamp(0.0, 1.0),
                y: rng.random(),
                touched: i < 40,
            }
        })
        .collect();
    let names = (0..10).map(|j| format!("f{j}")).collect();
    (
        FeatureMatrix::innate(n, names, cols).unwrap(),
        Layout::new(items).unwrap(),
    )
}

fn ranking_oracle() -> Outcome {
    let k = 3;
    let (mut first, mut exact) = (0, 0);
    for seed in 0..100u64 {
        let informative = (seed % 10) as usize;
        let (m, layout) = ranking_instance(seed, informative);
        let ranking = rank_features(&m, &layout, &KsgEstimator::new(k, seed)).unwrap();
        let touched = layout.touched_rows();
        let ys = jittered(&layout.block(&touched).unwrap(), seed);
        let oracle: Vec<f64> = (0..m.cols())
            .map(|j| {
                let c: Vec<f64> = touched.iter().map(|&i| m.column(j)[i]).collect();
                brute_ksg(&jittered(&col(&c), seed), &ys, k).max(0.0)
            })
            .collect();
        let mut expected: Vec<usize> = (0..m.cols()).collect();
        expected.sort_by(|&a, &b| oracle[b].total_cmp(&oracle[a]).then(a.cmp(&b)));
        let values_match = ranking
            .entries()
            .iter()
            .all(|e| (e.mi_nats - oracle[e.column]).abs() <= 1e-9);
        if values_match && ranking.columns() == expected {
            exact += 1;
        }
        if ranking.columns()[0] == informative {
            first += 1;
        }
    }
    check(
        first >= 95 && exact == 100,
        format!("informative first {first}/100 (need 95), brute-force match {exact}/100 (need 100)"),
    )
}

fn refinement_instance(seed: u64) -> (FeatureMatrix, Layout) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(14..30);
    let touched = rng.random_range(6..n.min(16));
    let hidden: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let cols: Vec<Vec<f64>> = (0..2)
        .map(|a| {
            hidden
                .iter()
                .map(|h| h[a] + 0.05 * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let items = (0..n)
        .map(|i| ItemPosition {
            id: format!("img_{i:03}"),
            x: 0.6 * hidden[i][0] + 0.4 * rng.random::<f64>(),
            y: 0.6 * hidden[i][1] + 0.4 * rng.random::<f64>(),
            touched: i < touched,
        })
        .collect();
    (
        FeatureMatrix::innate(n, vec!["a".into(), "b".into()], cols).unwrap(),
        Layout::new(items).unwrap(),
    )
}

fn refinement_monotone() -> Outcome {
    let mut violations = 0;
    let mut largest: f64 = 0.0;
    let mut delta = 0.0;
    for seed in 0..100u64 {
        let (m, layout) = refinement_instance(seed);
        let cfg = EngineConfig {
            seed,
            ..EngineConfig::default()
        };
        delta = cfg.delta;
        let r = refine_positions(&m, &layout, &cfg).unwrap();
        let mut bad = r.mi_after < r.mi_before;
        for (a, b) in layout.items().iter().zip(r.refined.items()) {
            let step = (a.x - b.x).abs().max((a.y - b.y).abs());
            largest = largest.max(step);
            bad |= step > cfg.delta + 1e-12 || (!a.touched && step > 0.0);
        }
        violations += bad as usize;
    }
    check(
        violations == 0,
        format!("{violations} violations over 100 instances, largest move {largest:.4} (delta {delta})"),
    )
}

fn guided_workflow() -> Outcome {
    let mut aris = Vec::new();
    let mut slowest: f64 = 0.0;
    for seed in 0..10u64 {
        let data = reference_dataset(seed).unwrap();
        let mut ws = Workspace::new("reference", data.items, data.features, seed).unwrap();
        let user = SimulatedUser {
            strategy: Strategy::ClassAnchors,
            sigma: 0.03,
            schedule: vec![8, 14, 20],
            seed,
        };
        let cfg = EngineConfig {
            seed,
            ..EngineConfig::default()
        };
        let report = simulate(&mut ws, &user, &cfg).unwrap();
        for r in &report.records {
            slowest = slowest.max(r.engine_ms);
        }
        aris.push(report.final_ari);
    }
    let m = median(&aris);
    check(
        m >= 0.8 && slowest <= 10_000.0,
        format!("median final ARI {m:.3} (need 0.8), slowest refinement {slowest:.0} ms (limit 10000)"),
    )
}

fn commit_semantics() -> Outcome {
    let data = reference_dataset(0).unwrap();
    let mut ws = Workspace::new("commits", data.items, data.features, 0).unwrap();
    let user = SimulatedUser {
        strategy: Strategy::ClassAnchors,
        sigma: 0.03,
        schedule: vec![8],
        seed: 0,
    };
    let cfg = EngineConfig::default();
    let mut dims = vec![ws.dims()];
    for i in 0..3 {
        ws.new_session(i).unwrap();
        simulate(&mut ws, &user, &cfg).unwrap();
        ws.commit(&format!("session-{i}"), None).unwrap();
        dims.push(ws.dims());
    }
    let grows = dims.windows(2).all(|w| w[1] == w[0] + 2);

    let dir = tempfile::tempdir().unwrap();
    let store = WorkspaceStore::new(dir.path());
    store.save(&ws).unwrap();
    let back = store.reload("commits", 0).unwrap();
    let (a, b) = (ws.raw_features(), back.raw_features());
    let mut worst: f64 = 0.0;
    let same_shape = a.rows() == b.rows() && a.cols() == b.cols() && a.names() == b.names();
    if same_shape {
        for j in 0..a.cols() {
            for (u, v) in a.column(j).iter().zip(b.column(j)) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    let logs = ws.commits() == back.commits() && a.provenance() == b.provenance();
    let layout = ws.layout() == back.layout();
    check(
        grows && same_shape && worst <= 1e-12 && logs && layout,
        format!("dims {dims:?}, reload max diff {worst:e} (tol 1e-12), logs equal: {logs}, layout equal: {layout}"),
    )
}

fn lazy_user() -> Outcome {
    let (mut with, mut without) = (Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let data = lazy_dataset(seed).unwrap();
        let cfg = EngineConfig {
            seed,
            ..EngineConfig::default()
        };
        let diligent = SimulatedUser {
            strategy: Strategy::ClassAnchors,
            sigma: 0.03,
            schedule: vec![data.items.len()],
            seed,
        };
        let lazy = SimulatedUser {
            strategy: Strategy::ClassAnchors,
            sigma: 0.10,
            schedule: vec![10],
            seed: seed + 100,
        };
        let run = with_and_without_commits(&data, &diligent, &lazy, &cfg, seed + 7).unwrap();
        with.push(run.with_commits.final_ari);
        without.push(run.without_commits.final_ari);
    }
    let (a, b) = (median(&with), median(&without));
    check(
        a >= 0.6 && b < a,
        format!("median ARI with commits {a:.3} (need 0.6), without {b:.3} (must be lower)"),
    )
}

async fn replay(file: &Path) -> Result<(), String> {
    let steps = parse(&std::fs::read_to_string(file).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    transcript::write_fixture(dir.path()).unwrap();
    let state = AppState::new(WorkspaceStore::new(dir.path()), EngineConfig::default());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(activecanvas_service::serve(listener, state.clone(), async {
        let _ = stopped.await;
    }));

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws/{FIXTURE_DATASET}"))
        .await
        .map_err(|e| e.to_string())?;
    let slot = state.slot(FIXTURE_DATASET).await.unwrap();
    let mut guard = None;
    let mut pending = steps
        .iter()
        .skip_while(|s| matches!(s, Step::Comment(_)))
        .take_while(|s| matches!(s, Step::Expect(_)))
        .count();
    let mut expected = steps.iter().filter_map(|s| match s {
        Step::Expect(f) => Some(f.clone()),
        _ => None,
    });
    for (i, step) in steps.iter().enumerate() {
        match step {
            Step::Send(f) => {
                ws.send(Message::Text(f.clone().into())).await.map_err(|e| e.to_string())?;
                pending += replies_after(&steps, i);
            }
            Step::Busy => guard = slot.try_begin(),
            Step::Idle => guard = None,
            _ => {}
        }
        while pending > 0 {
            let got = match ws.next().await {
                Some(Ok(Message::Text(t))) => t.to_string(),
                other => return Err(format!("unexpected frame {other:?}")),
            };
            let want = expected.next().ok_or("more frames than recorded")?;
            if mask_timing(&got) != mask_timing(&want) {
                return Err(format!("got {got}, want {want}"));
            }
            pending -= 1;
        }
    }
    if expected.next().is_some() {
        return Err("frames missing".into());
    }
    drop(guard);
    let _ = ws.close(None).await;
    let _ = stop.send(());
    server.await.unwrap().map_err(|e| e.to_string())?;
    Ok(())
}

fn protocol_conformance() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../service/tests/golden");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
    let mut names = Vec::new();
    for file in &files {
        let name = file.file_stem().unwrap().to_string_lossy().into_owned();
        rt.block_on(replay(file)).map_err(|e| format!("{name}: {e}"))?;
        names.push(name);
    }
    check(
        names.len() >= 4,
        format!("{} transcripts replayed over websocket: {}", names.len(), names.join(", ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("mi-estimator oracle", mi_oracle),
        ("invariance suite", invariance),
        ("feature-ranking oracle", ranking_oracle),
        ("refinement monotonicity", refinement_monotone),
        ("guided clustering workflow", guided_workflow),
        ("commit semantics", commit_semantics),
        ("lazy-user leverage", lazy_user),
        ("protocol conformance", protocol_conformance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
