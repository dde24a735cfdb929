//! Strict CIF subset: one data block, `_cell_*` scalars, one
//! `_atom_site_*` loop. Symmetry operations, multiple blocks, and
//! uncertainty suffixes like `1.234(5)` are out of scope except that
//! the bracketed part is tolerated and dropped.

use crate::elements::symbol_from_label;
use crate::{Error, Result};

use super::Structure;

fn parse_number(tok: &str, origin: &str, line_no: usize) -> Result<f64> {
    let clean = match tok.find('(') {
        Some(i) => &tok[..i],
        None => tok,
    };
    clean
        .parse::<f64>()
        .map_err(|_| Error::parse(origin, line_no, format!("expected a number, got {tok:?}")))
}

pub(super) fn parse(text: &str, origin: &str, fallback_name: &str) -> Result<Structure> {
    let mut name = fallback_name.to_string();
    let mut cell: [Option<f64>; 6] = [None; 6];
    let mut sites: Vec<(String, [f64; 3])> = Vec::new();

    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, raw)) = lines.next() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("data_") {
            name = rest.trim().to_string();
            continue;
        }
        if line.starts_with("_cell_") {
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            let value = parts
                .next()
                .ok_or_else(|| Error::parse(origin, line_no, format!("{key} has no value")))?;
            let slot = match key {
                "_cell_length_a" => 0,
                "_cell_length_b" => 1,
                "_cell_length_c" => 2,
                "_cell_angle_alpha" => 3,
                "_cell_angle_beta" => 4,
                "_cell_angle_gamma" => 5,
                _ => continue,
            };
            cell[slot] = Some(parse_number(value, origin, line_no)?);
            continue;
        }
        if line == "loop_" {
            // Collect the column headers that follow.
            let mut columns: Vec<String> = Vec::new();
            while let Some(&(_, peek)) = lines.peek() {
                let t = peek.trim();
                if t.starts_with('_') {
                    columns.push(t.split_whitespace().next().unwrap().to_string());
                    lines.next();
                } else {
                    break;
                }
            }
            if !columns.iter().any(|c| c.starts_with("_atom_site_")) {
                // Some other loop (e.g. symmetry ops); skip its body.
                while let Some(&(_, peek)) = lines.peek() {
                    let t = peek.trim();
                    if t.is_empty() || t == "loop_" || t.starts_with('_') || t.starts_with("data_")
                    {
                        break;
                    }
                    lines.next();
                }
                continue;
            }
            let col = |key: &str| columns.iter().position(|c| c == key);
            let ix = col("_atom_site_fract_x");
            let iy = col("_atom_site_fract_y");
            let iz = col("_atom_site_fract_z");
            let (ix, iy, iz) = match (ix, iy, iz) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        "atom_site loop is missing fract_x/fract_y/fract_z columns",
                    ))
                }
            };
            let isym = col("_atom_site_type_symbol");
            let ilbl = col("_atom_site_label");
            if isym.is_none() && ilbl.is_none() {
                return Err(Error::parse(
                    origin,
                    line_no,
                    "atom_site loop needs a type_symbol or label column",
                ));
            }
            while let Some(&(ridx, peek)) = lines.peek() {
                let row_no = ridx + 1;
                let t = peek.trim();
                if t.is_empty() || t == "loop_" || t.starts_with('_') || t.starts_with("data_") {
                    break;
                }
                lines.next();
                let fields: Vec<&str> = t.split_whitespace().collect();
                if fields.len() != columns.len() {
                    return Err(Error::parse(
                        origin,
                        row_no,
                        format!(
                            "atom_site row has {} fields, expected {}",
                            fields.len(),
                            columns.len()
                        ),
                    ));
                }
                let symbol = match isym {
                    Some(i) => fields[i].to_string(),
                    None => symbol_from_label(fields[ilbl.unwrap()]),
                };
                let fx = parse_number(fields[ix], origin, row_no)?;
                let fy = parse_number(fields[iy], origin, row_no)?;
                let fz = parse_number(fields[iz], origin, row_no)?;
                sites.push((symbol, [fx, fy, fz]));
            }
        }
    }

    let [a, b, c, alpha, beta, gamma] = cell;
    let missing = |what: &str| Error::parse(origin, 0, format!("missing {what}"));
    let lengths = [
        a.ok_or_else(|| missing("_cell_length_a"))?,
        b.ok_or_else(|| missing("_cell_length_b"))?,
        c.ok_or_else(|| missing("_cell_length_c"))?,
    ];
    let angles = [
        alpha.unwrap_or(90.0),
        beta.unwrap_or(90.0),
        gamma.unwrap_or(90.0),
    ];
    Structure::new(name, lengths, angles, sites)
}

pub(super) fn write(s: &Structure) -> String {
    let mut out = String::new();
    out.push_str(&format!("data_{}\n", s.name));
    out.push_str(&format!("_cell_length_a {}\n", s.cell_lengths[0]));
    out.push_str(&format!("_cell_length_b {}\n", s.cell_lengths[1]));
    out.push_str(&format!("_cell_length_c {}\n", s.cell_lengths[2]));
    out.push_str(&format!("_cell_angle_alpha {}\n", s.cell_angles[0]));
    out.push_str(&format!("_cell_angle_beta {}\n", s.cell_angles[1]));
    out.push_str(&format!("_cell_angle_gamma {}\n", s.cell_angles[2]));
    out.push_str("loop_\n");
    out.push_str("_atom_site_label\n");
    out.push_str("_atom_site_type_symbol\n");
    out.push_str("_atom_site_fract_x\n");
    out.push_str("_atom_site_fract_y\n");
    out.push_str("_atom_site_fract_z\n");
    for (i, atom) in s.atoms.iter().enumerate() {
        out.push_str(&format!(
            "{}{} {} {} {} {}\n",
            atom.symbol,
            i + 1,
            atom.symbol,
            atom.frac[0],
            atom.frac[1],
            atom.frac[2]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse_structure_str, write_structure, StructureFormat};
    use approx::assert_relative_eq;

    const MINIMAL: &str = "data_one_carbon
_cell_length_a 10.0
_cell_length_b 10.0
_cell_length_c 10.0
_cell_angle_alpha 90.0
_cell_angle_beta 90.0
_cell_angle_gamma 90.0
loop_
_atom_site_label
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
C1 C 0.0 0.0 0.0
";

    #[test]
    fn minimal_single_atom() {
        let s = parse_structure_str(MINIMAL, StructureFormat::CifSubset, "mem", "x").unwrap();
        assert_eq!(s.name, "one_carbon");
        assert_eq!(s.n_atoms(), 1);
        assert_eq!(s.atoms[0].mass, 12.011);
        assert_eq!(s.cell_lengths, [10.0, 10.0, 10.0]);
    }

    #[test]
    fn out_of_cell_coordinates_are_wrapped() {
        let text = MINIMAL.replace("C1 C 0.0 0.0 0.0", "C1 C 1.25 -0.25 0.5");
        let s = parse_structure_str(&text, StructureFormat::CifSubset, "mem", "x").unwrap();
        assert_relative_eq!(s.atoms[0].frac[0], 0.25);
        assert_relative_eq!(s.atoms[0].frac[1], 0.75);
        assert_relative_eq!(s.atoms[0].frac[2], 0.5);
    }

    // Hand sum of standard atomic weights: 6×12.011 + 6×1.008 = 78.114 amu.
    #[test]
    fn benzene_ring_total_mass() {
        let mut text = String::from(
            "data_benzene
_cell_length_a 20.0
_cell_length_b 20.0
_cell_length_c 20.0
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
",
        );
        // hexagon of C (r = 1.39 Å) with H (r = 2.47 Å) centered at (.5,.5,.5)
        for i in 0..6 {
            let theta = std::f64::consts::PI / 3.0 * i as f64;
            text += &format!(
                "C {} {} 0.5\n",
                0.5 + 1.39 * theta.cos() / 20.0,
                0.5 + 1.39 * theta.sin() / 20.0
            );
        }
        for i in 0..6 {
            let theta = std::f64::consts::PI / 3.0 * i as f64;
            text += &format!(
                "H {} {} 0.5\n",
                0.5 + 2.47 * theta.cos() / 20.0,
                0.5 + 2.47 * theta.sin() / 20.0
            );
        }
        let s = parse_structure_str(&text, StructureFormat::CifSubset, "mem", "x").unwrap();
        assert_eq!(s.n_atoms(), 12);
        assert_relative_eq!(s.total_mass(), 78.114, epsilon = 1e-9);
    }

    #[test]
    fn mass_total_is_permutation_invariant() {
        let fwd = "data_t
_cell_length_a 10
_cell_length_b 10
_cell_length_c 10
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
C 0.1 0.1 0.1
N 0.2 0.2 0.2
O 0.3 0.3 0.3
H 0.4 0.4 0.4
";
        let rev = "data_t
_cell_length_a 10
_cell_length_b 10
_cell_length_c 10
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
H 0.4 0.4 0.4
O 0.3 0.3 0.3
N 0.2 0.2 0.2
C 0.1 0.1 0.1
";
        let a = parse_structure_str(fwd, StructureFormat::CifSubset, "mem", "x").unwrap();
        let b = parse_structure_str(rev, StructureFormat::CifSubset, "mem", "x").unwrap();
        assert_eq!(a.total_mass(), b.total_mass());
    }

    #[test]
    fn unknown_element_is_rejected() {
        let text = MINIMAL.replace("C1 C", "Qq1 Qq");
        let err = parse_structure_str(&text, StructureFormat::CifSubset, "mem", "x");
        assert!(matches!(err, Err(crate::Error::UnknownElement { .. })));
    }

    #[test]
    fn nonpositive_cell_length_is_rejected() {
        let text = MINIMAL.replace("_cell_length_b 10.0", "_cell_length_b -1.0");
        assert!(parse_structure_str(&text, StructureFormat::CifSubset, "mem", "x").is_err());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = MINIMAL.replace("C1 C 0.0 0.0 0.0", "C1 C zero 0.0 0.0");
        match parse_structure_str(&text, StructureFormat::CifSubset, "mem", "x") {
            Err(crate::Error::Parse { line, .. }) => assert_eq!(line, 14),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn roundtrip_is_stable() {
        let text = MINIMAL.replace("C1 C 0.0 0.0 0.0", "C1 C 0.123456789 0.25 0.75");
        let s = parse_structure_str(&text, StructureFormat::CifSubset, "mem", "x").unwrap();
        let written = write_structure(&s, StructureFormat::CifSubset);
        let s2 = parse_structure_str(&written, StructureFormat::CifSubset, "mem", "x").unwrap();
        assert_eq!(s, s2);
    }
}
