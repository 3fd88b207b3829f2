#![no_main]

use libfuzzer_sys::fuzz_target;
use tsp_adjacency::cli::parse_args;

fuzz_target!(|data: &str| {
    let argv = std::iter::once("tsp-adjacency").chain(data.split_whitespace());
    let _ = parse_args(argv);
});
