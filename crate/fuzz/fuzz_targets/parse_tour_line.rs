#![no_main]

use libfuzzer_sys::fuzz_target;
use tsp_adjacency::instances::parse_tour_line;

fuzz_target!(|data: (bool, &str)| {
    let (directed, line) = data;
    if let Ok(t) = parse_tour_line(line, directed) {
        let back = parse_tour_line(&t.to_string(), directed).unwrap();
        assert_eq!(back, t);
    }
});
