#![no_main]
use hashlearn::learner::LinearModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(model) = LinearModel::read_from(data) else {
        return;
    };
    let mut out = Vec::new();
    model.write_to(&mut out).unwrap();
    let again = LinearModel::read_from(out.as_slice()).unwrap();
    assert_eq!(again.dim(), model.dim());
    assert_eq!(again.c().to_bits(), model.c().to_bits());
    assert_eq!(again.loss(), model.loss());
    assert_eq!(again.seed(), model.seed());
    for (a, b) in again.weights().iter().zip(model.weights()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
});
