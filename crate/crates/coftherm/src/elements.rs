//! Atomic mass and covalent radius tables.
//!
//! Masses are IUPAC standard atomic weights (conventional values for the
//! interval elements). Radii are Cordero single-bond covalent radii in Å.

use crate::{Error, Result};

/// (symbol, standard atomic weight in amu, covalent radius in Å)
const ELEMENTS: &[(&str, f64, f64)] = &[
    ("H", 1.008, 0.31),
    ("He", 4.002602, 0.28),
    ("Li", 6.94, 1.28),
    ("Be", 9.0121831, 0.96),
    ("B", 10.81, 0.84),
    ("C", 12.011, 0.76),
    ("N", 14.007, 0.71),
    ("O", 15.999, 0.66),
    ("F", 18.998403163, 0.57),
    ("Ne", 20.1797, 0.58),
    ("Na", 22.98976928, 1.66),
    ("Mg", 24.305, 1.41),
    ("Al", 26.9815385, 1.21),
    ("Si", 28.085, 1.11),
    ("P", 30.973761998, 1.07),
    ("S", 32.06, 1.05),
    ("Cl", 35.45, 1.02),
    ("Ar", 39.948, 1.06),
    ("K", 39.0983, 2.03),
    ("Ca", 40.078, 1.76),
    ("Sc", 44.955908, 1.70),
    ("Ti", 47.867, 1.60),
    ("V", 50.9415, 1.53),
    ("Cr", 51.9961, 1.39),
    ("Mn", 54.938044, 1.61),
    ("Fe", 55.845, 1.52),
    ("Co", 58.933194, 1.50),
    ("Ni", 58.6934, 1.24),
    ("Cu", 63.546, 1.32),
    ("Zn", 65.38, 1.22),
    ("Ga", 69.723, 1.22),
    ("Ge", 72.630, 1.20),
    ("As", 74.921595, 1.19),
    ("Se", 78.971, 1.20),
    ("Br", 79.904, 1.20),
    ("Kr", 83.798, 1.16),
    ("Zr", 91.224, 1.75),
    ("Mo", 95.95, 1.54),
    ("Ru", 101.07, 1.46),
    ("Pd", 106.42, 1.39),
    ("Ag", 107.8682, 1.45),
    ("Sn", 118.710, 1.39),
    ("Sb", 121.760, 1.39),
    ("Te", 127.60, 1.38),
    ("I", 126.90447, 1.39),
    ("Xe", 131.293, 1.40),
];

fn lookup(symbol: &str) -> Option<&'static (&'static str, f64, f64)> {
    ELEMENTS.iter().find(|(sym, _, _)| *sym == symbol)
}

/// Standard atomic weight in amu, or an error for unknown symbols.
pub fn atomic_mass(symbol: &str) -> Result<f64> {
    lookup(symbol).map(|e| e.1).ok_or_else(|| Error::UnknownElement {
        symbol: symbol.to_string(),
    })
}

/// Cordero single-bond covalent radius in Å.
pub fn covalent_radius(symbol: &str) -> Result<f64> {
    lookup(symbol).map(|e| e.2).ok_or_else(|| Error::UnknownElement {
        symbol: symbol.to_string(),
    })
}

pub fn is_known(symbol: &str) -> bool {
    lookup(symbol).is_some()
}

/// Strip site-label decorations (`"C12"` → `"C"`, `"n3"` → `"N"`).
pub fn symbol_from_label(label: &str) -> String {
    let alpha: String = label.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let mut chars = alpha.chars();
    match chars.next() {
        Some(first) => {
            let rest: String = chars.map(|c| c.to_ascii_lowercase()).collect();
            format!("{}{}", first.to_ascii_uppercase(), rest)
        }
        None => String::new(),
    }
}
