use std::f64::consts::PI;

use nalgebra::DVector;

/// Side length of the letter bitmaps.
pub const PATTERN_SIDE: usize = 5;

const H: [&str; 5] = ["10001", "10001", "11111", "10001", "10001"];
const T: [&str; 5] = ["11111", "00100", "00100", "00100", "00100"];
const L: [&str; 5] = ["10000", "10000", "10000", "10000", "11111"];

fn bitmap(rows: &[&str; 5]) -> Vec<f64> {
    rows.iter()
        .flat_map(|r| r.bytes().map(|b| if b == b'1' { 1.0 } else { -1.0 }))
        .collect()
}

/// The stored letters `H`, `T`, `L` as row-major ±1 vectors (foreground +1).
pub fn letter_patterns() -> [Vec<f64>; 3] {
    [bitmap(&H), bitmap(&T), bitmap(&L)]
}

pub fn letter_pattern(letter: char) -> Option<Vec<f64>> {
    match letter.to_ascii_uppercase() {
        'H' => Some(bitmap(&H)),
        'T' => Some(bitmap(&T)),
        'L' => Some(bitmap(&L)),
        _ => None,
    }
}

/// Phases of a ±1 pattern: `+1 → 0`, `−1 → π`.
pub fn phase_encoding(pattern: &[f64]) -> DVector<f64> {
    DVector::from_iterator(pattern.len(), pattern.iter().map(|&s| (1.0 - s) * PI / 2.0))
}
