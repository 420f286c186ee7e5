use super::{build_domain_with, AxiGrid, Field};
use crate::error::{input, Result};
use crate::potential::Model;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

/// Writes `r,z,u` rows.
pub fn write_csv(u: &Field, path: &Path) -> Result<()> {
    let g = u.grid();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "r,z,u")?;
    for i in 0..=g.nr {
        for j in 0..=g.nz {
            writeln!(w, "{:.12e},{:.12e},{:.17e}", g.r(i), g.z(j), u.at(i, j))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Little-endian dump: `n, a, b_eps, Nr, Nz, eps, k` then the values with `z` fastest.
pub fn write_binary(u: &Field, path: &Path) -> Result<()> {
    let g = u.grid();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(&(g.dim as u64).to_le_bytes())?;
    w.write_all(&g.a.to_le_bytes())?;
    w.write_all(&g.b_eps.to_le_bytes())?;
    w.write_all(&(g.nr as u64).to_le_bytes())?;
    w.write_all(&(g.nz as u64).to_le_bytes())?;
    w.write_all(&g.eps.to_le_bytes())?;
    w.write_all(&g.k.to_le_bytes())?;
    for v in &u.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dump written by [`write_binary`], rebuilding the grid. A model with the
/// matching `eps` may be supplied to skip rebuilding the profile.
pub fn read_binary(path: &Path, model: Option<Arc<Model>>) -> Result<Field> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 56 || bytes.len() % 8 != 0 {
        return input(format!("{} is not a field dump", path.display()));
    }
    let word = |k: usize| <[u8; 8]>::try_from(&bytes[8 * k..8 * k + 8]).expect("8 bytes");
    let dim = u64::from_le_bytes(word(0)) as usize;
    let a = f64::from_le_bytes(word(1));
    let b_eps = f64::from_le_bytes(word(2));
    let nr = u64::from_le_bytes(word(3)) as usize;
    let nz = u64::from_le_bytes(word(4)) as usize;
    let eps = f64::from_le_bytes(word(5));
    let k = f64::from_le_bytes(word(6));
    let count = (nr + 1) * (nz + 1);
    if bytes.len() != 8 * (7 + count) {
        return input(format!("{}: header promises {count} values", path.display()));
    }
    let model = match model {
        Some(m) if m.spec.eps == eps => m,
        _ => Arc::new(Model::new(eps)?),
    };
    let grid: Arc<AxiGrid> = build_domain_with(model, dim, a, k, nr, nz)?;
    if (grid.b_eps - b_eps).abs() > 1e-12 * b_eps {
        return input(format!("dump height {b_eps} disagrees with the rebuilt grid {}", grid.b_eps));
    }
    let values = (0..count).map(|c| f64::from_le_bytes(word(7 + c))).collect();
    Field::new(grid, values)
}
