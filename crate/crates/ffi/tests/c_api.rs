// SPDX-License-Identifier: Apache-2.0

use std::ffi::{c_char, c_int, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use lingpat::classify::{
    classify_by_levels, predict, train, vectorize_with, FeatureLayout, Hyperparameters, ModelKind, Prediction,
    TrainingSet,
};
use lingpat::corpus::{load_dataset, InputFormat};
use lingpat::patterns::{Level, PatternSet};
use lingpat::pipeline::Pipeline;
use lingpat_ffi::*;

const MINI_CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/mini_corpus.jsonl");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = lingpat_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn default_pipeline() -> *mut LingpatPipeline {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { lingpat_pipeline_new_default(&mut p) }, LingpatStatus::Ok);
    assert!(!p.is_null());
    p
}

unsafe fn take_string(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    lingpat_string_free(s);
    out
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(lingpat_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn match_json_equals_core_match_report() {
    let dataset = load_dataset(MINI_CORPUS, InputFormat::Jsonl).unwrap().dataset;
    let core = Pipeline::default_pipeline();
    let p = default_pipeline();
    for r in dataset.reports.iter().take(40) {
        let (id, title, body) = (c(&r.id), c(&r.title), c(&r.body));
        let mut out = ptr::null_mut();
        let status = unsafe { lingpat_match_json(p, id.as_ptr(), title.as_ptr(), body.as_ptr(), &mut out) };
        assert_eq!(status, LingpatStatus::Ok);
        let json = unsafe { take_string(out) };
        let mut expected_report = r.clone();
        expected_report.project.clear();
        assert_eq!(json, serde_json::to_string(&core.match_one(&expected_report)).unwrap());

        let mut positive: c_int = -1;
        let status = unsafe { lingpat_classify_levels(p, title.as_ptr(), body.as_ptr(), LINGPAT_LEVEL_BUG_REPORT, &mut positive) };
        assert_eq!(status, LingpatStatus::Ok);
        let expected = classify_by_levels(&core.match_one(r), &[Level::BugReport]).predicted == Prediction::Concurrency;
        assert_eq!(positive, c_int::from(expected), "{}", r.id);
    }
    unsafe { lingpat_pipeline_free(p) };
}

#[test]
fn model_scores_equal_core_predictions() {
    let dataset = load_dataset(MINI_CORPUS, InputFormat::Jsonl).unwrap().dataset;
    let core = Pipeline::default_pipeline();
    let layout = FeatureLayout::new(core.patterns(), &Level::ALL);
    let matches = core.match_dataset(&dataset, 1);
    let rows: Vec<Vec<u8>> = matches.iter().map(|m| vectorize_with(m, &layout).unwrap().bits).collect();
    let labels: Vec<bool> = dataset.reports.iter().map(|r| r.label.is_positive()).collect();
    let set = TrainingSet::new(layout.hash.clone(), rows, labels).unwrap();
    let model = train(ModelKind::LogisticRegression, &set, &Hyperparameters::default(), 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lr.model");
    model.save(&path).unwrap();

    let mut m = ptr::null_mut();
    let cpath = c(path.to_str().unwrap());
    assert_eq!(unsafe { lingpat_model_load(cpath.as_ptr(), &mut m) }, LingpatStatus::Ok);
    let p = default_pipeline();
    for (r, mr) in dataset.reports.iter().zip(&matches).take(60) {
        let (title, body) = (c(&r.title), c(&r.body));
        let (mut score, mut positive) = (f64::NAN, -1);
        let status = unsafe { lingpat_model_classify(m, p, title.as_ptr(), body.as_ptr(), &mut score, &mut positive) };
        assert_eq!(status, LingpatStatus::Ok);
        let expected = predict(&model, &vectorize_with(mr, &layout).unwrap()).unwrap();
        assert_eq!(score.to_bits(), expected.score.to_bits());
        assert_eq!(positive, c_int::from(expected.predicted == Prediction::Concurrency));
    }
    unsafe {
        lingpat_model_free(m);
        lingpat_pipeline_free(p);
    }
}

#[test]
fn model_from_other_pattern_set_is_a_layout_mismatch() {
    let mut patterns = PatternSet::default_set();
    patterns = patterns.restrict(|p| p.id != "BR6");
    let dir = tempfile::tempdir().unwrap();
    let ppath = dir.path().join("patterns.txt");
    std::fs::write(&ppath, patterns.to_text()).unwrap();
    let layout = FeatureLayout::new(&patterns, &[Level::BugReport]);
    let n = layout.len();
    let mut rows = vec![vec![0u8; n]];
    rows.extend((0..n).map(|i| (0..n).map(|j| u8::from(i == j)).collect()));
    let mut labels = vec![false];
    labels.extend(vec![true; n]);
    let model = train(ModelKind::LogisticRegression, &TrainingSet::new(layout.hash, rows, labels).unwrap(), &Hyperparameters::default(), 0).unwrap();
    let mpath = dir.path().join("br.model");
    model.save(&mpath).unwrap();

    let mut m = ptr::null_mut();
    let cm = c(mpath.to_str().unwrap());
    assert_eq!(unsafe { lingpat_model_load(cm.as_ptr(), &mut m) }, LingpatStatus::Ok);
    let p = default_pipeline();
    let title = c("Counter is wrong");
    let (mut score, mut positive) = (0.0, 0);
    let status = unsafe { lingpat_model_classify(m, p, title.as_ptr(), ptr::null(), &mut score, &mut positive) };
    assert_eq!(status, LingpatStatus::LayoutMismatch);
    assert!(last_error().contains("layout"));

    let mut q = ptr::null_mut();
    let cp = c(ppath.to_str().unwrap());
    assert_eq!(unsafe { lingpat_pipeline_load(ptr::null(), cp.as_ptr(), &mut q) }, LingpatStatus::Ok);
    let status = unsafe { lingpat_model_classify(m, q, title.as_ptr(), ptr::null(), &mut score, &mut positive) };
    assert_eq!(status, LingpatStatus::Ok);
    assert!(lingpat_last_error().is_null());
    unsafe {
        lingpat_model_free(m);
        lingpat_pipeline_free(p);
        lingpat_pipeline_free(q);
    }
}

#[test]
fn error_codes() {
    let p = default_pipeline();
    let mut out = ptr::null_mut();
    let mut flag = 0;
    unsafe {
        assert_eq!(lingpat_pipeline_new_default(ptr::null_mut()), LingpatStatus::NullArgument);
        assert_eq!(lingpat_match_json(ptr::null(), ptr::null(), c("t").as_ptr(), ptr::null(), &mut out), LingpatStatus::NullArgument);
        assert!(last_error().contains("pipeline"));
        assert_eq!(lingpat_match_json(p, ptr::null(), ptr::null(), ptr::null(), &mut out), LingpatStatus::InvalidArgument);
        let bad = [0xffu8 as c_char, 0];
        assert_eq!(lingpat_match_json(p, ptr::null(), bad.as_ptr(), ptr::null(), &mut out), LingpatStatus::InvalidUtf8);
        assert_eq!(lingpat_classify_levels(p, c("t").as_ptr(), ptr::null(), 0, &mut flag), LingpatStatus::InvalidArgument);
        assert_eq!(lingpat_classify_levels(p, c("t").as_ptr(), ptr::null(), 16, &mut flag), LingpatStatus::InvalidArgument);
        assert!(last_error().contains("16"));
        let missing = c("/nonexistent/lexicon.txt");
        assert_eq!(lingpat_pipeline_load(missing.as_ptr(), ptr::null(), &mut ptr::null_mut()), LingpatStatus::IoError);
        let mut m = ptr::null_mut();
        assert_eq!(lingpat_model_load(missing.as_ptr(), &mut m), LingpatStatus::IoError);
        assert!(m.is_null());
        let dir = tempfile::tempdir().unwrap();
        let junk = dir.path().join("junk.model");
        std::fs::write(&junk, "not a model\n").unwrap();
        let junk = c(junk.to_str().unwrap());
        assert_eq!(lingpat_model_load(junk.as_ptr(), &mut m), LingpatStatus::ParseError);
        lingpat_pipeline_free(ptr::null_mut());
        lingpat_model_free(ptr::null_mut());
        lingpat_string_free(ptr::null_mut());
        lingpat_pipeline_free(p);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lingpat.h")).unwrap();
    let source = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for opaque in ["typedef struct LingpatPipeline LingpatPipeline;", "typedef struct LingpatModel LingpatModel;"] {
        assert!(header.contains(opaque));
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"lingpat.h\"\nint main(void) {\n  LingpatPipeline *p = 0;\n  LingpatStatus s = lingpat_pipeline_new_default(&p);\n  lingpat_pipeline_free(p);\n  return s == LINGPAT_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let Ok(output) = Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(&include).arg(&src).output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
}
