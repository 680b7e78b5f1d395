//! Occupancy-grid datasets collected under the random policy.
//!
//! File layout, little-endian throughout:
//!
//! | offset | size | field                               |
//! |--------|------|-------------------------------------|
//! | 0      | 4    | magic `OSGD`                        |
//! | 4      | 4    | version (`u32`, currently 1)        |
//! | 8      | 4    | grid rows (`u32`)                   |
//! | 12     | 4    | grid cols (`u32`)                   |
//! | 16     | 8    | sample count (`u64`)                |
//! | 24     | 32   | SHA-256 digest of the scenario      |
//! | 56     | …    | `count` grids, row-major, 1 byte/cell |

use std::io::{self, Read, Write};

use crate::config::ScenarioConfig;
use crate::env::{Env, EnvError, EpisodeId};
use crate::policy::{Policy, RandomPolicy};
use crate::rng::SeedNamespace;
use crate::sensing::Modality;

pub const MAGIC: [u8; 4] = *b"OSGD";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDatasetHeader {
    pub version: u32,
    pub grid_rows: u32,
    pub grid_cols: u32,
    pub sample_count: u64,
    pub config_digest: [u8; 32],
}

impl GridDatasetHeader {
    pub fn for_config(config: &ScenarioConfig, sample_count: u64) -> Self {
        let n = config.sensors.leog_cells() as u32;
        GridDatasetHeader {
            version: FORMAT_VERSION,
            grid_rows: n,
            grid_cols: n,
            sample_count,
            config_digest: config.digest(),
        }
    }

    pub fn grid_len(&self) -> usize {
        self.grid_rows as usize * self.grid_cols as usize
    }

    /// Whether this dataset was produced by `config`.
    pub fn matches(&self, config: &ScenarioConfig) -> bool {
        let n = config.sensors.leog_cells() as u32;
        self.grid_rows == n && self.grid_cols == n && self.config_digest == config.digest()
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..8].copy_from_slice(&self.version.to_le_bytes());
        b[8..12].copy_from_slice(&self.grid_rows.to_le_bytes());
        b[12..16].copy_from_slice(&self.grid_cols.to_le_bytes());
        b[16..24].copy_from_slice(&self.sample_count.to_le_bytes());
        b[24..56].copy_from_slice(&self.config_digest);
        b
    }

    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self, DatasetError> {
        if b[0..4] != MAGIC {
            return Err(DatasetError::BadMagic);
        }
        let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(DatasetError::UnsupportedVersion(version));
        }
        Ok(GridDatasetHeader {
            version,
            grid_rows: u32_at(8),
            grid_cols: u32_at(12),
            sample_count: u64::from_le_bytes(b[16..24].try_into().unwrap()),
            config_digest: b[24..56].try_into().unwrap(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("not a grid dataset")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated dataset: expected {expected} grids, payload ends inside grid {at}")]
    Truncated { expected: u64, at: u64 },
    #[error("dataset has trailing bytes after {expected} grids")]
    TrailingData { expected: u64 },
    #[error("cell value {value} outside {{0, 1}} in grid {grid}")]
    BadCell { grid: u64, value: u8 },
    #[error("scenario has the occupancy-grid modality disabled")]
    LeogDisabled,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("write failed after {written} of {requested} grids (file is partial): {source}")]
    Write {
        written: u64,
        requested: u64,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Writes `n_samples` grids gathered by random-policy episodes, resetting
/// automatically whenever an episode ends. Deterministic in
/// `(config, seed)`.
pub fn collect<W: Write>(
    config: &ScenarioConfig,
    n_samples: u64,
    seed: u64,
    sink: &mut W,
) -> Result<u64, DatasetError> {
    if !config.sensors.has(Modality::Leog) {
        return Err(DatasetError::LeogDisabled);
    }
    if n_samples == 0 {
        return Err(DatasetError::NoSamples);
    }
    let mut env = Env::new(config.clone())?;
    let header = GridDatasetHeader::for_config(config, n_samples);
    let write_err = |written, source| DatasetError::Write {
        written,
        requested: n_samples,
        source,
    };
    sink.write_all(&header.to_bytes())
        .map_err(|e| write_err(0, e))?;

    let mut written = 0u64;
    let mut policy = RandomPolicy::default();
    let mut episode = 0u64;
    while written < n_samples {
        let id = EpisodeId {
            namespace: SeedNamespace::Dataset,
            seed,
            sub: episode,
        };
        episode += 1;
        let mut obs = env.reset_episode(id)?;
        policy.begin_episode(env.policy_rng());
        let mut done = false;
        loop {
            let grid = obs.leog.as_ref().expect("leog modality enabled");
            sink.write_all(&grid.cells)
                .map_err(|e| write_err(written, e))?;
            written += 1;
            if written == n_samples || done {
                break;
            }
            let step = env.step(policy.act(&obs))?;
            done = step.terminated || step.truncated;
            obs = step.observation;
        }
    }
    sink.flush().map_err(|e| write_err(written, e))?;
    Ok(written)
}

/// Streaming reader; holds at most one grid in memory.
pub struct GridReader<R> {
    source: R,
    header: GridDatasetHeader,
    next: u64,
    buf: Vec<u8>,
    failed: bool,
}

/// Parses the header and returns a reader over the grids.
pub fn read<R: Read>(mut source: R) -> Result<GridReader<R>, DatasetError> {
    let mut raw = [0u8; HEADER_LEN];
    let n = read_full(&mut source, &mut raw)?;
    let prefix = n.min(4);
    if n < 4 || raw[..prefix] != MAGIC[..prefix] {
        return Err(DatasetError::BadMagic);
    }
    if n < HEADER_LEN {
        return Err(DatasetError::Truncated { expected: 0, at: 0 });
    }
    let header = GridDatasetHeader::from_bytes(&raw)?;
    Ok(GridReader {
        buf: vec![0; header.grid_len()],
        source,
        header,
        next: 0,
        failed: false,
    })
}

/// Reads until `buf` is full or the source is exhausted.
fn read_full<R: Read>(source: &mut R, buf: &mut [u8]) -> Result<usize, DatasetError> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

impl<R: Read> GridReader<R> {
    pub fn header(&self) -> &GridDatasetHeader {
        &self.header
    }

    /// Borrows the next grid, or `None` after the last one. Reaching the end
    /// also verifies there is no trailing data.
    pub fn next_grid(&mut self) -> Option<Result<&[u8], DatasetError>> {
        if self.failed {
            return None;
        }
        let expected = self.header.sample_count;
        if self.next == expected {
            self.failed = true;
            let mut probe = [0u8; 1];
            return match read_full(&mut self.source, &mut probe) {
                Ok(0) => None,
                Ok(_) => Some(Err(DatasetError::TrailingData { expected })),
                Err(e) => Some(Err(e)),
            };
        }
        let at = self.next;
        let result = match read_full(&mut self.source, &mut self.buf) {
            Ok(n) if n < self.buf.len() => Err(DatasetError::Truncated { expected, at }),
            Ok(_) => match self.buf.iter().find(|&&c| c > 1) {
                Some(&value) => Err(DatasetError::BadCell { grid: at, value }),
                None => Ok(()),
            },
            Err(e) => Err(e),
        };
        match result {
            Ok(()) => {
                self.next += 1;
                Some(Ok(&self.buf))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

impl<R: Read> Iterator for GridReader<R> {
    type Item = Result<Vec<u8>, DatasetError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_grid().map(|r| r.map(<[u8]>::to_vec))
    }
}
