//! Fuzz target for the name and value parsers behind the flags.
//!
//! Every accepted limiter or stencil name must survive a round trip
//! through its display form.

#![no_main]
use dglimit::cli::{parse_meshes, parse_on_off, parse_test, DtChoice};
use dglimit::limiters::{Cadence, FluxLimiter, SlopeLimiter};
use dglimit::mesh::StencilMode;
use dglimit::timestep::Space;
use libfuzzer_sys::fuzz_target;

const MAX_INPUT_SIZE: usize = 4096;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT_SIZE {
        return;
    }
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = s.parse::<FluxLimiter>() {
        assert_eq!(f.to_string().parse::<FluxLimiter>().ok(), Some(f));
    }
    if let Ok(l) = s.parse::<SlopeLimiter>() {
        assert_eq!(l.to_string().parse::<SlopeLimiter>().ok(), Some(l));
    }
    if let Ok(m) = s.parse::<StencilMode>() {
        assert_eq!(m.to_string().parse::<StencilMode>().ok(), Some(m));
    }
    let _ = s.parse::<Cadence>();
    let _ = s.parse::<Space>();
    if let Ok(DtChoice::Fixed(dt)) = s.parse::<DtChoice>() {
        assert!(dt > 0.0 && dt.is_finite());
    }
    if let Ok(meshes) = parse_meshes(s) {
        assert!(meshes.iter().all(|&n| n >= 2));
    }
    let _ = parse_on_off(s);
    if let Ok(case) = parse_test(s) {
        assert!(!case.name.is_empty());
    }
});
