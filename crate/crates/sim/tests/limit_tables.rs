use sncpa_sim::limit::{quantile_table, quantile_tables, simulate_draws, Functional, FunctionalFamily, STANDARD_PROBS};
use sncpa_sim::with_threads;

#[test]
fn quantiles_monotone_and_increasing_in_q() {
    let fams: Vec<FunctionalFamily> = (2..=5).map(|q| Functional::MatrixCusumForm(q).into()).collect();
    let tables = quantile_tables(&fams, 400, 2000, &STANDARD_PROBS, 17).unwrap();
    for t in &tables {
        t.check().unwrap();
    }
    for w in tables.windows(2) {
        for (a, b) in w[0].values.iter().zip(&w[1].values) {
            assert!(b > a, "{} vs {}", w[0].family.label(), w[1].family.label());
        }
    }
}

#[test]
fn noncentral_range_ratio_dominates() {
    let null = quantile_table(&Functional::RangeRatio.into(), 1000, 10_000, &[0.5], 23).unwrap();
    let alt = FunctionalFamily::noncentral(Functional::RangeRatio, vec![1.0]).unwrap();
    let alt = quantile_table(&alt, 1000, 10_000, &[0.5], 23).unwrap();
    assert!(alt.values[0] > null.values[0]);
}

#[test]
fn median_stable_across_discretizations() {
    let fam: FunctionalFamily = Functional::RangeRatio.into();
    let coarse = quantile_table(&fam, 500, 20_000, &[0.5], 31).unwrap();
    let fine = quantile_table(&fam, 5000, 4000, &[0.5], 32).unwrap();
    let se = (coarse.std_errors[0].powi(2) + fine.std_errors[0].powi(2)).sqrt();
    assert!((coarse.values[0] - fine.values[0]).abs() < 3.0 * se, "{} vs {} (se {se})", coarse.values[0], fine.values[0]);
}

#[test]
fn tables_independent_of_worker_count() {
    let fams: Vec<FunctionalFamily> = vec![Functional::ShaoScalar.into(), Functional::ComponentRangeSum(2).into()];
    let one = with_threads(1, || quantile_tables(&fams, 300, 500, &STANDARD_PROBS, 9)).unwrap().unwrap();
    let three = with_threads(3, || quantile_tables(&fams, 300, 500, &STANDARD_PROBS, 9)).unwrap().unwrap();
    for (a, b) in one.iter().zip(&three) {
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}

#[test]
fn draws_are_replication_addressable() {
    let fam: FunctionalFamily = Functional::MatrixCusumForm(2).into();
    let all = simulate_draws(std::slice::from_ref(&fam), 200, 50, 4).unwrap();
    let tenth = sncpa_sim::limit::simulate_replication(&fam, 200, 4, 10).unwrap();
    assert_eq!(all.values[0][10], tenth);
}
