use mgtheta_web::ops;

#[test]
fn demo_operations() {
    let names: Vec<String> = serde_json::from_str(&ops::instance_names()).unwrap();
    assert_eq!(names.len(), 6);
    let chsh = ops::instance_source("chsh").unwrap();
    assert!(ops::instance_source("nope").is_err());

    let view: serde_json::Value = serde_json::from_str(&ops::ingest(&chsh).unwrap()).unwrap();
    assert_eq!(view["vertices"], 8);
    assert!(view["table"].as_str().unwrap().contains("00|00"));
    assert_eq!(view["factors"][0]["edges"].as_array().unwrap().len(), 8);

    let c: serde_json::Value = serde_json::from_str(&ops::classical(&chsh).unwrap()).unwrap();
    assert_eq!(c["alpha"], 3.0);
    assert!((c["theta"].as_f64().unwrap() - 3.4142136).abs() < 1e-6);

    let pent1 = ops::instance_source("pent1").unwrap();
    let r: serde_json::Value = serde_json::from_str(&ops::mtheta(&pent1, "1+AB", 1, 42, false).unwrap()).unwrap();
    assert!((r["bound"].as_f64().unwrap() - 2.178).abs() < 1e-3);
    let r: serde_json::Value = serde_json::from_str(&ops::mtheta(&pent1, "1.3", 2, 1, false).unwrap()).unwrap();
    assert_eq!(r["per_trial"].as_array().unwrap().len(), 2);
    assert!(ops::mtheta(&pent1, "1.q", 2, 1, false).is_err());
    assert!(ops::ingest("{").is_err());
}
