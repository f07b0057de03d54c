//! Raw little-endian snapshot of the solver state.
//!
//! Layout: `"NVKN"`, version `u32`, step `u64`, `t`, slice time, `nx u64`, `x_min`, `x_max`,
//! grid count `u32`, particle count `u64`, particle field count `u32`, the ensemble constants
//! (cell volume, `f_in` sup, `phi0` sup, `a` sup, four `u64` lattice sizes), then the grids in
//! [`GRID_NAMES`] order and the particles as `(x, p1, p2, p3, a, m, c)` records.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kinetic::{MomentGrids, State};
use crate::particle::{Ensemble, KineticParticle};
use crate::wavefield::FieldSlice;

pub const MAGIC: &[u8; 4] = b"NVKN";
pub const VERSION: u32 = 1;
pub const GRID_NAMES: [&str; 11] = [
    "phi", "dphi_dt", "dphi_dx", "psi", "mu", "sigma", "rho", "j", "kinetic", "phi_hom", "momentum",
];
pub const PARTICLE_FIELDS: u32 = 7;

const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8 + 8 + 8 + 4 + 8 + 4 + 4 * 8 + 4 * 8;

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn encode(state: &State, grid: &Grid) -> Result<Vec<u8>> {
    let nx = grid.nx;
    let grids = grid_refs(state);
    if let Some((name, g)) = GRID_NAMES.iter().zip(&grids).find(|(_, g)| g.len() != nx) {
        return Err(Error::Snapshot(format!(
            "grid {name} has {} values, expected {nx}",
            g.len()
        )));
    }
    let ens = &state.ensemble;
    let np = ens.particles.len();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * (GRID_NAMES.len() * nx + 7 * np));
    buf.extend_from_slice(MAGIC);
    put_u32(&mut buf, VERSION);
    put_u64(&mut buf, state.step as u64);
    put_f64(&mut buf, state.t);
    put_f64(&mut buf, state.slice.t);
    put_u64(&mut buf, nx as u64);
    put_f64(&mut buf, grid.x_min);
    put_f64(&mut buf, grid.x_max);
    put_u32(&mut buf, GRID_NAMES.len() as u32);
    put_u64(&mut buf, np as u64);
    put_u32(&mut buf, PARTICLE_FIELDS);
    for v in [ens.cell_volume, ens.f_in_sup, ens.phi0_sup, ens.a_sup] {
        put_f64(&mut buf, v);
    }
    for v in ens.lattice {
        put_u64(&mut buf, v as u64);
    }
    for g in grids {
        for &v in g {
            put_f64(&mut buf, v);
        }
    }
    for p in &ens.particles {
        for v in [p.x, p.p[0], p.p[1], p.p[2], p.a, p.m, p.c] {
            put_f64(&mut buf, v);
        }
    }
    Ok(buf)
}

fn grid_refs(state: &State) -> [&Vec<f64>; 11] {
    let (s, m) = (&state.slice, &state.moments);
    [
        &s.phi,
        &s.dphi_dt,
        &s.dphi_dx,
        &s.psi,
        &m.mu,
        &m.sigma,
        &m.rho,
        &m.j,
        &m.kinetic,
        &s.phi_hom,
        &m.momentum,
    ]
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Snapshot(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn vec(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode(bytes: &[u8]) -> Result<(Grid, State)> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!(
            "version {version}, expected {VERSION}"
        )));
    }
    let step = r.u64()? as usize;
    let t = r.f64()?;
    let slice_t = r.f64()?;
    let nx = r.u64()? as usize;
    let (x_min, x_max) = (r.f64()?, r.f64()?);
    let n_grids = r.u32()? as usize;
    let np = r.u64()? as usize;
    let fields = r.u32()?;
    if n_grids != GRID_NAMES.len() || fields != PARTICLE_FIELDS {
        return Err(Error::Snapshot(format!(
            "layout declares {n_grids} grids and {fields} particle fields"
        )));
    }
    if nx < 2 {
        return Err(Error::Snapshot(format!("nx = {nx}")));
    }
    let expected = nx
        .checked_mul(n_grids)
        .and_then(|g| {
            np.checked_mul(fields as usize)
                .and_then(|p| g.checked_add(p))
        })
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Snapshot(format!(
            "header declares {} bytes, file has {}",
            expected.map_or("overflowing".to_string(), |v| v.to_string()),
            bytes.len()
        )));
    }
    let (cell_volume, f_in_sup, phi0_sup, a_sup) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let mut lattice = [0usize; 4];
    for l in &mut lattice {
        *l = r.u64()? as usize;
    }
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(n_grids);
    for _ in 0..n_grids {
        g.push(r.vec(nx)?);
    }
    let mut particles = Vec::with_capacity(np);
    for _ in 0..np {
        let v = r.vec(7)?;
        particles.push(KineticParticle {
            x: v[0],
            p: [v[1], v[2], v[3]],
            a: v[4],
            m: v[5],
            c: v[6],
        });
    }
    let mut g = g.into_iter();
    let mut next = || g.next().expect("grid count checked");
    let (phi, dphi_dt, dphi_dx, psi) = (next(), next(), next(), next());
    let (mu, sigma, rho, j, kinetic) = (next(), next(), next(), next(), next());
    let (phi_hom, momentum) = (next(), next());
    let state = State {
        step,
        t,
        ensemble: Ensemble {
            particles,
            cell_volume,
            f_in_sup,
            phi0_sup,
            a_sup,
            lattice,
        },
        slice: FieldSlice {
            t: slice_t,
            phi,
            dphi_dt,
            dphi_dx,
            phi_hom,
            psi,
        },
        moments: MomentGrids {
            mu,
            sigma,
            rho,
            j,
            kinetic,
            momentum,
        },
    };
    Ok((Grid::new(x_min, x_max, nx), state))
}

pub fn write_snapshot(path: &Path, state: &State, grid: &Grid) -> Result<()> {
    fs::write(path, encode(state, grid)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Grid, State)> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: &[f64]) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    fn sample_state(nx: usize, np: usize) -> State {
        let f = |k: usize| (k as f64 * 0.37).sin() * 1e-3;
        let grid_vec = |o: usize| (0..nx).map(|i| f(i + 31 * o)).collect::<Vec<f64>>();
        State {
            step: 7,
            t: 0.7000000000000001,
            ensemble: Ensemble {
                particles: (0..np)
                    .map(|k| KineticParticle {
                        x: f(k),
                        p: [f(k + 1), -f(k + 2), f(k + 3)],
                        a: 1.0 + f(k),
                        m: 0.25,
                        c: 3.0,
                    })
                    .collect(),
                cell_volume: 0.125,
                f_in_sup: 2.0,
                phi0_sup: -0.0,
                a_sup: 1.5,
                lattice: [3, 4, 5, 6],
            },
            slice: FieldSlice {
                t: 0.7,
                phi: grid_vec(0),
                dphi_dt: grid_vec(1),
                dphi_dx: grid_vec(2),
                phi_hom: grid_vec(3),
                psi: grid_vec(4),
            },
            moments: MomentGrids {
                mu: grid_vec(5),
                sigma: grid_vec(6),
                rho: grid_vec(7),
                j: grid_vec(8),
                kinetic: grid_vec(9),
                momentum: grid_vec(10),
            },
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let g = Grid::new(-3.0, 3.0, 13);
        let s = sample_state(13, 9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.nvkn");
        write_snapshot(&path, &s, &g).unwrap();
        let (g2, s2) = read_snapshot(&path).unwrap();
        assert_eq!(g, g2);
        assert_eq!(s2.step, s.step);
        assert_eq!(s2.t.to_bits(), s.t.to_bits());
        assert_eq!(
            s2.ensemble.phi0_sup.to_bits(),
            s.ensemble.phi0_sup.to_bits()
        );
        for (a, b) in grid_refs(&s).iter().zip(grid_refs(&s2)) {
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(encode(&s2, &g2).unwrap(), encode(&s, &g).unwrap());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let g = Grid::new(-3.0, 3.0, 13);
        let bytes = encode(&sample_state(13, 4), &g).unwrap();
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(decode(&bad_magic).is_err());
        let mut bad_version = bytes.clone();
        bad_version[4] = 2;
        assert!(matches!(decode(&bad_version), Err(Error::Snapshot(m)) if m.contains("version")));
        assert!(decode(&bytes[..bytes.len() - 8]).is_err());
        let mut long = bytes.clone();
        long.extend_from_slice(&[0; 8]);
        assert!(decode(&long).is_err());
    }

    #[test]
    fn wrong_grid_length_is_refused() {
        let g = Grid::new(-3.0, 3.0, 14);
        assert!(encode(&sample_state(13, 1), &g).is_err());
    }
}
