//! End-to-end runs through the library: tables written to disk and read back
//! feed the next stage unchanged.

use cluster_virial::groundstate::GroundStateTable;
use cluster_virial::mayer::{
    b_k_monte_carlo, b_k_quadrature, compute_table, MayerRequest, MayerTable,
};
use cluster_virial::potential::two_well;
use cluster_virial::thermo::{crossover_scan, nu_of_mu};
use cluster_virial::virial::{radius_bounds, VirialTable};
use cluster_virial::{MonteCarloSettings, PairPotential, QuadratureSettings};

#[test]
fn mayer_csv_round_trip_feeds_virial_stage() {
    let p = PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap();
    let table = compute_table(&p, &MayerRequest::new(4, vec![1.0, 2.0, 4.0])).unwrap();
    let dir = std::env::temp_dir().join(format!("cluster-virial-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mayer.csv");
    table.write_csv_file(&path).unwrap();
    let back = MayerTable::read_csv_file(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();

    let direct = VirialTable::from_mayer(&table, 4).unwrap();
    let resumed = VirialTable::from_mayer(&back, 4).unwrap();
    for beta in [1.0, 2.0, 4.0] {
        for n in 2..=4 {
            assert_eq!(
                direct.get(n, beta).unwrap().d_n,
                resumed.get(n, beta).unwrap().d_n
            );
        }
    }
    assert!(resumed.inconsistencies(1e-9).is_empty());
}

#[test]
fn ramp_well_quadrature_agrees_with_monte_carlo() {
    let p = PairPotential::ramp_well(1.0, 1.5, 1.0, 1.2, 1).unwrap();
    let mc = MonteCarloSettings {
        samples: 400_000,
        seed: 7,
        ..Default::default()
    };
    for k in [3, 4] {
        let q = b_k_quadrature(&p, k, 2.0, &QuadratureSettings::default()).unwrap();
        let m = b_k_monte_carlo(&p, k, 2.0, &mc).unwrap();
        let sigma = (q.error.powi(2) + m.error.powi(2)).sqrt();
        assert!(
            (q.value - m.value).abs() <= 4.0 * sigma,
            "k={k}: {q:?} vs {m:?}"
        );
    }
}

#[test]
fn two_well_crossover_from_ground_state_file() {
    let p = two_well();
    let gs = GroundStateTable::oracle_1d(&p, 6, 0.02).unwrap();
    let path = std::env::temp_dir().join(format!("cluster-virial-gs-{}.json", std::process::id()));
    gs.write_json(&path).unwrap();
    let gs = GroundStateTable::read_json(&path).unwrap();
    std::fs::remove_file(&path).unwrap();

    let mu = -3.0;
    assert_eq!(
        nu_of_mu(&gs.energies(), mu, 1e-9).unwrap().minimizers,
        vec![2]
    );
    let grid = vec![6.0, 8.0, 10.0];
    let table = compute_table(&p, &MayerRequest::new(4, grid.clone())).unwrap();
    let columns: Vec<(f64, Vec<f64>)> = grid
        .iter()
        .map(|&b| (b, table.column(b).unwrap().0))
        .collect();
    let report = crossover_scan(&columns, &p, &gs, mu, 1e-9).unwrap();
    assert!(report.density_trend_ok);
    assert_eq!(report.pressure_trend_ok, Some(true));
    let last = report.rows.last().unwrap();
    assert!((last.pressure_ratio.unwrap() - 1.0).abs() < 0.05);

    let e_inf = gs.require_thresholds().unwrap().e_inf;
    let r = radius_bounds(&columns[2].1, p.v_norm(), e_inf, 10.0).unwrap();
    assert!(r.lower > 0.0 && r.lower <= r.penrose_min);
}
