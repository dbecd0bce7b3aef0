#![no_main]
use hashlearn::sketch::SketchFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = SketchFile::decode(data) {
        // decoding is strict, so re-encoding reproduces the input exactly
        assert_eq!(file.encode(), data);
    }
});
