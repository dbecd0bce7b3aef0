#![no_main]
use hashlearn::data::{parse_line, read_sparse_text, write_example, ReadOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let opts = ReadOptions {
        zero_is_negative: data.first().is_some_and(|b| b & 1 == 1),
    };
    for record in read_sparse_text(data, opts) {
        let Ok(example) = record else { break };
        // anything accepted must survive a write/parse cycle unchanged
        let mut line = Vec::new();
        write_example(&mut line, &example).unwrap();
        let text = std::str::from_utf8(&line).unwrap();
        let again = parse_line(text, 1, ReadOptions::default()).unwrap();
        assert_eq!(again, example);
    }
});
