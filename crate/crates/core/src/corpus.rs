//! Worked examples shipped with the library: qubit passing, measurement, a noisy channel in two presentations, a recursive
//! relay and a file of algebraic laws.

pub const FILES: &[(&str, &str)] = &[
    ("bell.qccs", include_str!("../corpus/bell.qccs")),
    ("measurement.qccs", include_str!("../corpus/measurement.qccs")),
    ("noisy.qccs", include_str!("../corpus/noisy.qccs")),
    ("copier.qccs", include_str!("../corpus/copier.qccs")),
    ("laws.qccs", include_str!("../corpus/laws.qccs")),
    ("empty.qccs", include_str!("../corpus/empty.qccs")),
];

/// The source of a shipped example.
pub fn get(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_file;

    #[test]
    fn every_example_parses() {
        for (name, src) in FILES {
            parse_file(src).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        }
    }
}
