use odbr_capture::{offline_capture, FixtureBridge, Scenario, SensorFloors};
use odbr_capture::DeviceBridge;
use odbr_testkit::{all_scenarios, fixtures_dir, scenario};

#[test]
fn every_scenario_loads() {
    let names: Vec<String> = all_scenarios().iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for want in ["single-tap", "two-taps", "three-actions", "tap", "long-press", "swipe", "multi-touch", "key-press", "no-actions"] {
        assert!(names.iter().any(|n| n == want), "missing {want}");
    }
    for dir in all_scenarios() {
        let s = Scenario::load(&dir).unwrap();
        assert!(!s.events.is_empty(), "{}", dir.display());
        assert!(!s.app_package().is_empty());
        assert!(s.device.packages.iter().any(|p| p == s.app_package()));
    }
}

#[test]
fn missing_files_are_holes() {
    let s = Scenario::load(fixtures_dir().join("faulty/capture-gap")).unwrap();
    assert!((0..s.dumps.len()).any(|i| s.screens.get(i).map_or(true, Option::is_none)));
    let raw = offline_capture(&s, &SensorFloors::new()).unwrap();
    assert!(raw.captures.iter().any(|c| c.screenshot.is_none() && !c.failures.is_empty()));

    let none = Scenario::load(scenario("no-actions")).unwrap();
    assert!(none.dumps.is_empty() && none.screens.is_empty());
}

#[test]
fn sensors_are_rebased_and_rate_limited() {
    let s = Scenario::load(scenario("two-taps")).unwrap();
    let raw = offline_capture(&s, &SensorFloors::new()).unwrap();
    let acc = raw.sensor_traces.iter().find(|t| t.kind.name() == "accelerometer").expect("accelerometer trace");
    assert_eq!(acc.samples[0].timestamp, 0);
    for w in acc.samples.windows(2) {
        assert!(w[1].timestamp - w[0].timestamp >= acc.min_interval_ms * 1000);
    }

    let mut floors = SensorFloors::new();
    floors.insert("accelerometer".into(), 200);
    let slow = offline_capture(&s, &floors).unwrap();
    let acc2 = slow.sensor_traces.iter().find(|t| t.kind.name() == "accelerometer").unwrap();
    assert_eq!(acc2.min_interval_ms, 200);
    assert!(acc2.samples.len() < acc.samples.len());
}

#[test]
fn fixture_bridge_serves_in_order() {
    let s = Scenario::load(scenario("two-taps")).unwrap();
    let first_dump = s.dumps[0].clone().unwrap();
    let second_screen = s.screens[1].clone().unwrap();
    let b = FixtureBridge::new(s, 0.0);
    assert_eq!(b.dump_hierarchy().unwrap(), first_dump);
    b.screencap().unwrap();
    assert_eq!(b.screencap().unwrap(), second_screen);
    assert!(b.screencap().is_err());
    assert!(b.run_shell("ls").is_err());
    assert!(!b.realtime());
    b.inject_event(1, 3, 0x35, 7).unwrap();
    assert_eq!(b.injected().len(), 1);
    let feed = b.stream_input_events().unwrap();
    assert_eq!(feed.rx.iter().count(), b.scenario().events.len());
}
