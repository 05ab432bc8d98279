use gravdec_core::experiment::{self, ExperimentConfig};
use gravdec_core::registry;
use gravdec_core::{Error, SourceModel};

#[test]
fn every_registered_combination_runs() {
    let deltas = registry::delta_methods();
    let engines = registry::coincidence_engines();
    for source in [
        SourceModel::pdc(0.02).unwrap(),
        SourceModel::coherent(0.6).unwrap(),
    ] {
        let base = ExperimentConfig::earth_reference(source)
            .unwrap()
            .with_height(3e5)
            .unwrap();
        for d in deltas.names() {
            let mut rates = Vec::new();
            for e in engines.names() {
                let config = base
                    .clone()
                    .with_delta_method(deltas.get(d).unwrap())
                    .with_engine(engines.get(e).unwrap());
                let r = experiment::run(&config).unwrap();
                assert!(r.delta < 0.0 && r.overlap > 0.0 && r.overlap < 1.0);
                rates.push((e, r.coincidence));
            }
            let wick = rates.iter().find(|(e, _)| *e == "wick").unwrap().1;
            for (e, c) in &rates {
                let bound = match (*e, source) {
                    ("second-order", SourceModel::Pdc { chi }) => chi.powi(4),
                    _ => 1e-9 * wick,
                };
                assert!((c - wick).abs() <= bound, "{d}/{e}: {c} vs {wick}");
            }
        }
    }
}

#[test]
fn unknown_names_are_reported() {
    let err = registry::coincidence_engines()
        .get("monte-carlo")
        .unwrap_err();
    assert!(matches!(err, Error::UnknownStrategy { .. }));
    assert!(err.to_string().contains("fock, second-order, wick"));
}

#[test]
fn exact_and_weak_sweeps_converge_near_ground() {
    let pdc = ExperimentConfig::earth_reference(SourceModel::pdc(0.01).unwrap()).unwrap();
    let weak = pdc
        .clone()
        .with_delta_method(registry::delta_methods().get("weak").unwrap());
    let a = experiment::sweep_heights(&pdc, 0.0, 2e4, 11).unwrap();
    let b = experiment::sweep_heights(&weak, 0.0, 2e4, 11).unwrap();
    for ((h, x), (_, y)) in a.iter().zip(&b) {
        assert!((x.normalized - y.normalized).abs() < 1e-6, "h = {h}");
    }
}
