use std::path::PathBuf;

use dpmst::graph::{is_spanning_tree, kruskal_mst, tree_weight};
use dpmst::harness::{run_trials_with, write_report_csv, RunOptions, REPORT_HEADER};
use dpmst::instances::{read_instance, write_instance, InstanceModel, InstanceSpec};
use dpmst::privacy::PrivacyBudget;
use dpmst::{Graph, MechanismId};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_report.csv")
}

fn fixed_report_csv() -> Vec<u8> {
    let spec = InstanceSpec {
        model: InstanceModel::ErdosRenyi { n: 8, p: 0.6, wmin: 0.0, wmax: 10.0 },
        seed: 17,
    };
    let g: Graph = spec.generate().unwrap();
    let budget = PrivacyBudget::new(1.0, 1e-6, g.delta_inf()).unwrap();
    let opts = RunOptions { parallel: true, timing: false };
    let report = run_trials_with(&g, MechanismId::Kruskal, &budget, 5, 2024, opts).unwrap();
    let mut buf = Vec::new();
    write_report_csv(&report, &mut buf).unwrap();
    buf
}

/// Regenerate with `DPMST_BLESS=1 cargo test -p dpmst --test pipeline`.
#[test]
fn report_csv_matches_golden_file() {
    let got = fixed_report_csv();
    if std::env::var("DPMST_BLESS").is_ok_and(|v| v == "1") {
        std::fs::write(golden_path(), &got).unwrap();
    }
    let want = std::fs::read(golden_path()).unwrap();
    assert_eq!(String::from_utf8(got).unwrap(), String::from_utf8(want).unwrap());
}

#[test]
fn instance_file_to_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("hard.txt");
    let spec = InstanceSpec {
        model: InstanceModel::Hard { n: 15, beta: 1.35, s: 10 },
        seed: 3,
    };
    let g: Graph = spec.generate().unwrap();
    write_instance(&g, &file).unwrap();
    let back: Graph = read_instance(&file).unwrap();
    assert_eq!(back.weights(), g.weights());

    let budget = PrivacyBudget::from_rho(0.5, 1e-6, back.delta_inf()).unwrap();
    let true_weight = tree_weight(&back, &kruskal_mst(&back, back.weights()).unwrap()).unwrap();
    for mech in MechanismId::ALL {
        let rep = run_trials_with(&back, mech, &budget, 8, 11, RunOptions::default()).unwrap();
        assert_eq!(rep.records.len(), 8);
        for r in &rep.records {
            assert_eq!(r.true_weight, true_weight);
            assert!((r.error - (r.private_weight - r.true_weight)).abs() < 1e-9);
            assert!(r.error >= -1e-9);
        }
        let mean = rep.errors().iter().sum::<f64>() / 8.0;
        assert!((rep.aggregates.mean - mean).abs() < 1e-9);
    }
}

#[test]
fn csv_reads_back_with_a_standard_parser() {
    let bytes = fixed_report_csv();
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), REPORT_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let t: f64 = row[11].parse().unwrap();
        let p: f64 = row[12].parse().unwrap();
        let e: f64 = row[13].parse().unwrap();
        assert!((p - t - e).abs() < 1e-9);
    }
}

#[test]
fn every_mechanism_returns_spanning_trees() {
    let g: Graph = InstanceSpec {
        model: InstanceModel::ErdosRenyi { n: 40, p: 0.2, wmin: -5.0, wmax: 5.0 },
        seed: 8,
    }
    .generate()
    .unwrap();
    let budget = PrivacyBudget::new(0.5, 1e-5, 1.0).unwrap();
    let mut rng = dpmst::RngStream::new(1, 0);
    for mech in MechanismId::ALL {
        let res = dpmst::mechanisms::run_mechanism(mech, &g, &budget, &mut rng).unwrap();
        assert!(is_spanning_tree(&g, res.tree.edge_ids()), "{mech}");
        if let Some(noisy) = &res.noisy_weights {
            let private = noisy.release == dpmst::mechanisms::Release::Private;
            assert_eq!(private, mech.releases_noisy_weights(), "{mech}");
            assert!(res.is_mst_of_noisy_weights(&g).unwrap(), "{mech}");
        } else {
            assert!(!mech.releases_noisy_weights(), "{mech}");
        }
    }
}
