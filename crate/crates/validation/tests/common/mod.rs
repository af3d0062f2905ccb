use std::path::PathBuf;
use std::sync::OnceLock;

use zml_core::lab::{Lab, DEFAULT_SAMPLE_TOL, SAMPLE_CEILING};

/// Sample store persisted between runs.
pub fn cache_path() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("zml_samples.csv")
}

/// A lab with the full sampled range loaded (from disk when possible).
pub fn lab() -> &'static Lab {
    static LAB: OnceLock<Lab> = OnceLock::new();
    LAB.get_or_init(|| {
        let path = cache_path();
        let lab = Lab::open(&path, DEFAULT_SAMPLE_TOL).expect("open sample cache");
        lab.table(1, SAMPLE_CEILING).expect("sample the critical line");
        lab.save(&path).expect("save sample cache");
        lab
    })
}
