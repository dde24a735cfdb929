//! Extended XYZ: atom count, then a comment line carrying
//! `Lattice="ax ay az bx by bz cx cy cz"` (diagonal only) and an optional
//! `Properties=...` / `Name=...`, then one `symbol x y z [extra...]` row
//! per atom with Cartesian coordinates in Å.

use crate::{Error, Result};

use super::Structure;

fn quoted_field<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let tag = format!("{key}=\"");
    let start = comment.find(&tag)? + tag.len();
    let end = comment[start..].find('"')? + start;
    Some(&comment[start..end])
}

pub(super) fn parse(text: &str, origin: &str, fallback_name: &str) -> Result<Structure> {
    let mut lines = text.lines();
    let count_line = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "empty file"))?;
    let n: usize = count_line
        .trim()
        .parse()
        .map_err(|_| Error::parse(origin, 1, "first line must be the atom count"))?;
    let comment = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 2, "missing comment line"))?;

    let lattice = quoted_field(comment, "Lattice")
        .ok_or_else(|| Error::parse(origin, 2, "missing Lattice=\"...\" field"))?;
    let vals: Vec<f64> = lattice
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(origin, 2, "Lattice must contain 9 numbers"))?;
    if vals.len() != 9 {
        return Err(Error::parse(origin, 2, "Lattice must contain 9 numbers"));
    }
    for (i, &v) in vals.iter().enumerate() {
        let diagonal = matches!(i, 0 | 4 | 8);
        if !diagonal && v.abs() > 1e-9 {
            return Err(Error::parse(
                origin,
                2,
                "non-diagonal lattice: only orthogonal cells are supported",
            ));
        }
    }
    let lengths = [vals[0], vals[4], vals[8]];
    let name = quoted_field(comment, "Name")
        .unwrap_or(fallback_name)
        .to_string();

    let mut sites = Vec::with_capacity(n);
    for i in 0..n {
        let line_no = i + 3;
        let row = lines
            .next()
            .ok_or_else(|| Error::parse(origin, line_no, "unexpected end of file"))?;
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::parse(
                origin,
                line_no,
                "atom row needs `symbol x y z`",
            ));
        }
        let mut cart = [0.0; 3];
        for k in 0..3 {
            cart[k] = fields[k + 1].parse::<f64>().map_err(|_| {
                Error::parse(origin, line_no, format!("bad coordinate {:?}", fields[k + 1]))
            })?;
        }
        sites.push((
            fields[0].to_string(),
            [cart[0] / lengths[0], cart[1] / lengths[1], cart[2] / lengths[2]],
        ));
    }
    Structure::new(name, lengths, [90.0, 90.0, 90.0], sites)
}

pub(super) fn write(s: &Structure, extra: Option<(&str, &[String])>) -> String {
    let mut out = format!("{}\n", s.n_atoms());
    let props = match extra {
        Some((name, _)) => format!("species:S:1:pos:R:3:{name}:S:1"),
        None => "species:S:1:pos:R:3".to_string(),
    };
    out += &format!(
        "Lattice=\"{} 0 0 0 {} 0 0 0 {}\" Properties={} Name=\"{}\"\n",
        s.cell_lengths[0], s.cell_lengths[1], s.cell_lengths[2], props, s.name
    );
    for i in 0..s.n_atoms() {
        let c = s.cart(i);
        out += &format!("{} {} {} {}", s.atoms[i].symbol, c[0], c[1], c[2]);
        if let Some((_, values)) = extra {
            out += &format!(" {}", values[i]);
        }
        out.push('\n');
    }
    out
}
