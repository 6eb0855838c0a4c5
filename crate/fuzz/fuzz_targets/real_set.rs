#![no_main]
use lattice_shells::borel::RealSet;
use libfuzzer_sys::fuzz_target;

// Parsed sets must print to text that parses back to the same set.
fuzz_target!(|data: &str| {
    if let Ok(set) = RealSet::parse(data) {
        let again = RealSet::parse(&set.to_string()).expect("display output parses");
        assert_eq!(again, set);
        assert_eq!(set.complement().complement(), set);
    }
});
