#![no_main]

use libfuzzer_sys::fuzz_target;
use tsp_adjacency::cli::{read_csv, write_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_csv(data) {
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let _ = read_csv(buf.as_slice()).unwrap();
    }
});
