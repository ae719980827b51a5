//! Field and atom serialization: a CSV text format and a flat binary
//! format, both carrying the grid header (dim, L, M) followed by
//! row-major complex values.

use std::io::Write;

use num_complex::Complex64;

use crate::atoms::{AtomKind, SmoothAtom};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid, SampledField};

/// Upper bound on accepted lattice sizes when deserializing
/// (`M^dim`); keeps hostile headers from driving huge allocations.
const MAX_FIELD_LEN: usize = 1 << 24;

pub fn write_field_csv<W: Write>(f: &SampledField, w: &mut W) -> Result<()> {
    let g = f.grid;
    writeln!(w, "dim,L,M")?;
    writeln!(
        w,
        "{},{},{}",
        g.dim(),
        fmt_float(g.half_extent()),
        g.points_per_axis()
    )?;
    writeln!(w, "re,im")?;
    for v in &f.values {
        writeln!(w, "{},{}", fmt_float(v.re), fmt_float(v.im))?;
    }
    Ok(())
}

/// Shortest round-trip float formatting; deterministic across runs.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        // normalize -0
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} value '{}'", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite {what} value")));
    }
    Ok(v)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} value '{}'", s.trim())))
}

fn grid_from_header(dim: usize, l: f64, m: usize) -> Result<Grid> {
    if dim == 0 || dim > 3 {
        return Err(Error::Parse(format!("unsupported dimension {dim}")));
    }
    if m == 0 || m.pow(dim as u32 - 1).saturating_mul(m) > MAX_FIELD_LEN {
        return Err(Error::Parse(format!("lattice size {m}^{dim} out of range")));
    }
    if !(l > 0.0 && l < 1e6) {
        return Err(Error::Parse(format!("half extent {l} out of range")));
    }
    make_grid(dim, l, m)
}

pub fn read_field_csv(text: &str) -> Result<SampledField> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "dim,L,M" => {}
        _ => return Err(Error::Parse("missing 'dim,L,M' header".into())),
    }
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing grid header row".into()))?;
    let parts: Vec<&str> = header.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse("grid header row needs 3 fields".into()));
    }
    let dim = parse_usize(parts[0], "dim")?;
    let l = parse_f64(parts[1], "L")?;
    let m = parse_usize(parts[2], "M")?;
    let grid = grid_from_header(dim, l, m)?;
    match lines.next() {
        Some(h) if h.trim() == "re,im" => {}
        _ => return Err(Error::Parse("missing 're,im' header".into())),
    }
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (re, im) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad value row '{line}'")))?;
        values.push(Complex64::new(
            parse_f64(re, "re")?,
            parse_f64(im, "im")?,
        ));
        if values.len() > grid.len() {
            return Err(Error::Parse("more value rows than lattice points".into()));
        }
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!(
            "expected {} value rows, got {}",
            grid.len(),
            values.len()
        )));
    }
    Ok(SampledField { grid, values })
}

const BINARY_MAGIC: &[u8; 4] = b"MCF1";

pub fn write_field_binary<W: Write>(f: &SampledField, w: &mut W) -> Result<()> {
    let g = f.grid;
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&g.half_extent().to_le_bytes())?;
    w.write_all(&(g.points_per_axis() as u64).to_le_bytes())?;
    for v in &f.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary(bytes: &[u8]) -> Result<SampledField> {
    if bytes.len() < 4 + 4 + 8 + 8 {
        return Err(Error::Parse("binary field truncated".into()));
    }
    if &bytes[..4] != BINARY_MAGIC {
        return Err(Error::Parse("bad magic bytes".into()));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if !l.is_finite() {
        return Err(Error::Parse("non-finite half extent".into()));
    }
    let m = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if m > MAX_FIELD_LEN as u64 {
        return Err(Error::Parse("lattice size out of range".into()));
    }
    let grid = grid_from_header(dim, l, m as usize)?;
    let payload = &bytes[24..];
    if payload.len() != grid.len() * 16 {
        return Err(Error::Parse(format!(
            "expected {} payload bytes, got {}",
            grid.len() * 16,
            payload.len()
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    Ok(SampledField { grid, values })
}

/// Writes a grid-resident atom: metadata header, then the field CSV.
pub fn write_atom<W: Write>(atom: &SmoothAtom, grid: Grid, w: &mut W) -> Result<()> {
    let field = atom.sample_on(grid)?;
    writeln!(w, "atom 1")?;
    writeln!(w, "dim {}", atom.dim)?;
    writeln!(
        w,
        "support_center {}",
        atom.support_center
            .iter()
            .map(|v| fmt_float(*v))
            .collect::<Vec<_>>()
            .join(" ")
    )?;
    writeln!(w, "support_side {}", fmt_float(atom.support_side))?;
    writeln!(w, "vanishing_order {}", atom.vanishing_order)?;
    writeln!(w, "sup_bound {}", fmt_float(atom.sup_bound))?;
    write_field_csv(&field, w)
}

/// Reads an atom written by [`write_atom`]; the values become a
/// grid-resident atom.
pub fn read_atom(text: &str) -> Result<SmoothAtom> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "atom 1" => {}
        _ => return Err(Error::Parse("missing 'atom 1' header".into())),
    }
    let mut dim = None;
    let mut center = None;
    let mut side = None;
    let mut order = None;
    let mut sup = None;
    let mut consumed = "atom 1\n".len();
    for line in lines {
        let raw_len = line.len() + 1;
        let line = line.trim();
        if line == "dim,L,M" {
            break;
        }
        consumed += raw_len;
        let (key, val) = line
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("bad metadata line '{line}'")))?;
        match key {
            "dim" => dim = Some(parse_usize(val, "dim")?),
            "support_center" => {
                center = Some(
                    val.split_whitespace()
                        .map(|s| parse_f64(s, "support_center"))
                        .collect::<Result<Vec<f64>>>()?,
                )
            }
            "support_side" => side = Some(parse_f64(val, "support_side")?),
            "vanishing_order" => order = Some(parse_usize(val, "vanishing_order")? as u32),
            "sup_bound" => sup = Some(parse_f64(val, "sup_bound")?),
            _ => return Err(Error::Parse(format!("unknown metadata key '{key}'"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("missing dim".into()))?;
    let center = center.ok_or_else(|| Error::Parse("missing support_center".into()))?;
    let side = side.ok_or_else(|| Error::Parse("missing support_side".into()))?;
    let order = order.ok_or_else(|| Error::Parse("missing vanishing_order".into()))?;
    let sup = sup.ok_or_else(|| Error::Parse("missing sup_bound".into()))?;
    if center.len() != dim {
        return Err(Error::Parse("support_center dimension mismatch".into()));
    }
    if !(side > 0.0) || !(sup >= 0.0) {
        return Err(Error::Parse("bad support_side or sup_bound".into()));
    }
    let field = read_field_csv(&text[consumed..])?;
    if field.grid.dim() != dim {
        return Err(Error::Parse("field dimension does not match atom".into()));
    }
    if field.max_abs() > sup * (1.0 + 1e-9) {
        return Err(Error::Parse(
            "field values exceed the declared sup bound".into(),
        ));
    }
    Ok(SmoothAtom {
        dim,
        kind: AtomKind::Sampled {
            field,
            factor: 1.0,
        },
        support_center: center,
        support_side: side,
        vanishing_order: order,
        sup_bound: sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::derivative_atom;
    use crate::grid::sample;

    fn test_field() -> SampledField {
        let g = make_grid(1, 4.0, 16).unwrap();
        sample(|x| (-x[0] * x[0]).exp(), g).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let f = test_field();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let back = read_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn binary_round_trip() {
        let f = test_field();
        let mut buf = Vec::new();
        write_field_binary(&f, &mut buf).unwrap();
        let back = read_field_binary(&buf).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.values, f.values);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_field_csv("").is_err());
        assert!(read_field_csv("dim,L,M\n9,4,16\nre,im\n").is_err());
        assert!(read_field_csv("dim,L,M\n1,4,16\nre,im\n1,2\n").is_err());
        assert!(read_field_binary(b"").is_err());
        assert!(read_field_binary(b"XXXX12345678901234567890").is_err());
        let mut buf = Vec::new();
        write_field_binary(&test_field(), &mut buf).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(read_field_binary(&buf).is_err());
    }

    #[test]
    fn atom_round_trip() {
        let g = make_grid(1, 4.0, 64).unwrap();
        let a = derivative_atom(&[2], &[0.0], 1.0).unwrap();
        let mut buf = Vec::new();
        write_atom(&a, g, &mut buf).unwrap();
        let back = read_atom(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.dim, 1);
        assert_eq!(back.vanishing_order, 1);
        assert_eq!(back.support_side, a.support_side);
        let orig = a.sample_on(g).unwrap();
        let resampled = back.sample_on(g).unwrap();
        assert_eq!(orig.values, resampled.values);
    }
}
