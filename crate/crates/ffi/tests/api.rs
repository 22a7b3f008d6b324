use std::ffi::CStr;
use std::ptr;

use pitune_ffi::*;

const EPS: f64 = 1e-12;

fn plant(kp: f64, t1: f64, t2: f64) -> *mut PitunePlant {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pitune_plant_new(kp, t1, t2, &mut p) }, PituneStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> Option<String> {
    let msg = pitune_last_error_message();
    (!msg.is_null()).then(|| unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned())
}

#[test]
fn tune_and_read_back() {
    let p = plant(1.0, 0.05, 1.0);
    let (mut kp, mut t1, mut t2) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { pitune_plant_params(p, &mut kp, &mut t1, &mut t2) }, PituneStatus::Ok);
    assert_eq!((kp, t1, t2), (1.0, 1.0, 0.05));

    let mut c = PituneController { k: 0.0, ti: 0.0 };
    assert_eq!(unsafe { pitune_tune(p, &mut c) }, PituneStatus::Ok);
    assert!((c.k - 5.0).abs() < EPS && (c.ti - 1.0).abs() < EPS);

    let (mut zeta, mut wn) = (0.0, 0.0);
    assert_eq!(unsafe { pitune_damping(p, c, &mut zeta, &mut wn) }, PituneStatus::Ok);
    assert!((zeta - 1.0).abs() < EPS && (wn - 10.0).abs() < 1e-10);
    unsafe { pitune_plant_free(p) };
}

#[test]
fn analyze_and_robustness() {
    let p = plant(1.0, 1.0, 0.2);
    let mut c = PituneController { k: 0.0, ti: 0.0 };
    assert_eq!(unsafe { pitune_tune(p, &mut c) }, PituneStatus::Ok);

    let mut report = PituneLoopReport::default();
    assert_eq!(unsafe { pitune_analyze(p, c, &mut report) }, PituneStatus::Ok);
    assert!(report.cancellation_detected);
    let mut re: Vec<f64> = report.poles.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    for (got, want) in re.iter().zip([-2.5, -2.5, -1.0]) {
        assert!((got - want).abs() < 1e-8, "{got}");
    }
    assert!(report.poles.iter().all(|z| z.im.abs() < 1e-8));

    let mut m = PituneFreqMetrics::default();
    assert_eq!(unsafe { pitune_robustness(p, c, &mut m) }, PituneStatus::Ok);
    assert!((m.ms - 2.0 / 3.0f64.sqrt()).abs() < 5e-4);
    assert!((m.mt - 1.0).abs() < 1e-6);
    assert!((m.pm_deg - 76.3454).abs() < 0.01);
    assert!((m.wgc * 0.2 - 0.242_934_1).abs() < 1e-6);
    unsafe { pitune_plant_free(p) };
}

#[test]
fn simulate_and_metrics() {
    let p = plant(1.0, 1.0, 0.5);
    let mut c = PituneController { k: 0.0, ti: 0.0 };
    assert_eq!(unsafe { pitune_tune(p, &mut c) }, PituneStatus::Ok);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { pitune_simulate(p, c, 0.005, 0.0, &mut r) }, PituneStatus::Ok);
    let n = unsafe { pitune_step_response_len(r) };
    assert_eq!(n, 6001);
    assert_eq!(unsafe { pitune_step_response_dt(r) }, 0.005);

    let mut written = 0;
    let mut small = [0.0; 4];
    assert_eq!(
        unsafe { pitune_step_response_samples(r, small.as_mut_ptr(), small.len(), &mut written) },
        PituneStatus::BufferTooSmall
    );
    assert_eq!(written, n);
    assert!(last_error().unwrap().contains("6001"));

    let mut buf = vec![0.0; n];
    assert_eq!(unsafe { pitune_step_response_samples(r, buf.as_mut_ptr(), n, &mut written) }, PituneStatus::Ok);
    assert_eq!(last_error(), None);
    let worst = buf
        .iter()
        .enumerate()
        .map(|(k, y)| (y - pitune_analytic_step(0.5, k as f64 * 0.005)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6);

    let mut m = PituneStepMetrics::default();
    assert_eq!(unsafe { pitune_step_metrics(r, 0.02, &mut m) }, PituneStatus::Ok);
    assert!((m.ts - 5.835).abs() <= 0.010);
    assert!(m.po <= 1e-6 && m.monotonic);
    unsafe { pitune_step_response_free(r) };
    unsafe { pitune_plant_free(p) };
}

#[test]
fn settling_constant_matches_reference() {
    let mut tau = 0.0;
    assert_eq!(unsafe { pitune_settling_constant(0.02, &mut tau) }, PituneStatus::Ok);
    assert!((tau - 5.833_921_701_917_391).abs() < 1e-9);
    assert_eq!(unsafe { pitune_settling_constant(0.05, &mut tau) }, PituneStatus::Ok);
    assert!((tau - 4.743_864_518_390_578).abs() < 1e-9);
    assert_eq!(unsafe { pitune_settling_constant(1.5, &mut tau) }, PituneStatus::InvalidArgument);
}

#[test]
fn error_codes() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pitune_plant_new(1.0, 1.0, 0.0, &mut p) }, PituneStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().unwrap().contains("t2 must be > 0"));
    assert_eq!(unsafe { pitune_plant_new(1.0, 1.0, 0.5, ptr::null_mut()) }, PituneStatus::NullPointer);

    let mut c = PituneController { k: 0.0, ti: 0.0 };
    assert_eq!(unsafe { pitune_tune(ptr::null(), &mut c) }, PituneStatus::NullPointer);

    let p = plant(1.0, 1.0, 0.5);
    let (mut zeta, mut wn) = (0.0, 0.0);
    let detuned = PituneController { k: 1.0, ti: 2.0 };
    assert_eq!(unsafe { pitune_damping(p, detuned, &mut zeta, &mut wn) }, PituneStatus::CancellationRequired);
    let bad = PituneController { k: -1.0, ti: 1.0 };
    let mut m = PituneFreqMetrics::default();
    assert_eq!(unsafe { pitune_robustness(p, bad, &mut m) }, PituneStatus::InvalidArgument);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { pitune_tune(p, &mut c) }, PituneStatus::Ok);
    assert_eq!(unsafe { pitune_simulate(p, c, 0.005, 2.0, &mut r) }, PituneStatus::Ok);
    let mut sm = PituneStepMetrics::default();
    assert_eq!(unsafe { pitune_step_metrics(r, 0.02, &mut sm) }, PituneStatus::NotSettled);
    unsafe { pitune_step_response_free(r) };
    unsafe { pitune_plant_free(p) };

    assert_eq!(unsafe { pitune_step_response_len(ptr::null()) }, 0);
    unsafe { pitune_plant_free(ptr::null_mut()) };
    unsafe { pitune_step_response_free(ptr::null_mut()) };
}

#[test]
fn status_messages_are_static() {
    for status in [PituneStatus::Ok, PituneStatus::NotSettled, PituneStatus::Panic] {
        let text = unsafe { CStr::from_ptr(pitune_status_message(status)) };
        assert!(!text.to_bytes().is_empty());
    }
}
