#![no_main]

use libfuzzer_sys::fuzz_target;
use tsp_adjacency::instances::{parse_instance, serialize_instance};

fuzz_target!(|data: &str| {
    if let Ok(inst) = parse_instance(data) {
        let text = serialize_instance(&inst);
        let again = parse_instance(&text).expect("serialized instance parses");
        assert_eq!(serialize_instance(&again), text);
    }
});
