use tsn_delay::num::Ext;
use tsn_delay::scenario::{bundled, bundled_names, Scenario};

#[test]
fn bundled_scenarios_round_trip() {
    for name in bundled_names() {
        let s = Scenario::parse(bundled(name).unwrap()).unwrap();
        let again = Scenario::parse(&s.to_json_string()).unwrap();
        assert_eq!(s, again, "{name}");
        assert_eq!(again.to_json_string(), s.to_json_string(), "{name}");
    }
}

#[test]
fn sec7a_has_ten_flows_on_two_servers() {
    let s = Scenario::parse(bundled("sec7a").unwrap()).unwrap();
    assert_eq!(s.flows.len(), 10);
    assert_eq!(s.servers.len(), 2);
    let sys = s.system("flow6").unwrap();
    assert_eq!(sys.server_name, "classB");
    assert_eq!(sys.flows.len(), 5);
}

const MINIMAL: &str = r#"{
  "server": {"kind": "rate-latency", "params": {"rate": "10Mbps", "latency": "5us"}, "lineRate": "100Mbps"},
  "flows": [{"name": "x", "constraint": {"family": "bit", "kind": "token-bucket", "params": {"rate": "1Mbps", "burst": "2KB"}}, "lmin": "64B", "lmax": "1500B"}]
}"#;

#[test]
fn minimal_file_is_valid() {
    let s = Scenario::parse(MINIMAL).unwrap();
    let sys = s.system(s.focus(None).unwrap()).unwrap();
    let b = tsn_delay::bounds::delay_bound_classic(&sys.flows, &sys.server).unwrap();
    assert!(matches!(b.value, Ext::Fin(_)));
}

#[test]
fn negative_rate_is_rejected_with_a_path() {
    let bad = MINIMAL.replace("\"1Mbps\"", "\"-1Mbps\"");
    let s = Scenario::parse(&bad).and_then(|s| s.system("x").map(|_| ()));
    let e = s.unwrap_err().to_string();
    assert!(e.contains("flows[0]"), "{e}");
}

#[test]
fn unknown_flow_is_an_error() {
    let s = Scenario::parse(MINIMAL).unwrap();
    assert!(s.system("nope").is_err());
}

#[test]
fn malformed_json_is_an_error() {
    assert!(Scenario::parse("{\"flows\": [").is_err());
}
