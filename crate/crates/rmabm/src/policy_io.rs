//! Binary dump of a trained policy set.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic        8 bytes  "RMABM-QT"
//! version      u32
//! mode         u8       0 shared, 1 independent
//! n_states     u32
//! n_actions    u32
//! obs_min, obs_max, act_min, act_max   f64 x 4
//! final_eps    f64
//! episodes     u64
//! tables       u32
//!   per table: values f64 x n_states^2 * n_actions^2, then counts u32 x same
//! config_len   u32, then the experiment config as JSON
//! sha256       32 bytes over everything above
//! ```

use std::fs;
use std::path::Path;

use rmabm_core::harness::{ExperimentConfig, TrainedPolicySet};
use rmabm_core::rl::{PolicyMode, PolicySet, QTable};
use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext};

pub const MAGIC: &[u8; 8] = b"RMABM-QT";
pub const VERSION: u32 = 1;

pub fn encode(set: &TrainedPolicySet) -> Vec<u8> {
    let rl = &set.config.rl;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match set.policies.mode {
        PolicyMode::Shared => 0,
        PolicyMode::Independent => 1,
    });
    out.extend_from_slice(&(rl.n_states as u32).to_le_bytes());
    out.extend_from_slice(&(rl.n_actions as u32).to_le_bytes());
    for x in [rl.obs_min, rl.obs_max, rl.act_min, rl.act_max, set.final_epsilon] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&(set.episodes_trained as u64).to_le_bytes());
    out.extend_from_slice(&(set.policies.tables.len() as u32).to_le_bytes());
    for t in &set.policies.tables {
        for v in t.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in t.counts() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    let config = serde_json::to_vec(&set.config).expect("config serialises");
    out.extend_from_slice(&(config.len() as u32).to_le_bytes());
    out.extend_from_slice(&config);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        if self.buf.len() < n {
            return Err("truncated".into());
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<TrainedPolicySet, String> {
    if bytes.len() < MAGIC.len() + 32 || &bytes[..8] != MAGIC {
        return Err("bad magic".into());
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { buf: &body[8..] };
    let version = r.u32()?;
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let mode = match r.u8()? {
        0 => PolicyMode::Shared,
        1 => PolicyMode::Independent,
        m => return Err(format!("unknown policy mode {m}")),
    };
    let n_states = r.u32()? as usize;
    let n_actions = r.u32()? as usize;
    let grid = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
    let final_epsilon = r.f64()?;
    let episodes_trained = r.u64()? as usize;
    let count = r.u32()? as usize;
    let len = (n_states * n_states)
        .checked_mul(n_actions * n_actions)
        .ok_or("table shape overflows")?;
    let mut tables = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let values = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        let counts = (0..len).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err("non-finite Q-value".into());
        }
        tables.push(QTable::from_parts(n_states, n_actions, values, counts).ok_or("bad table shape")?);
    }
    let config_len = r.u32()? as usize;
    let config: ExperimentConfig =
        serde_json::from_slice(r.take(config_len)?).map_err(|e| format!("config: {e}"))?;
    if !r.buf.is_empty() {
        return Err("trailing bytes".into());
    }
    let rl = &config.rl;
    if (rl.n_states, rl.n_actions) != (n_states, n_actions)
        || [rl.obs_min, rl.obs_max, rl.act_min, rl.act_max] != grid
        || rl.policy_mode != mode
    {
        return Err("grid header disagrees with the stored config".into());
    }
    let policies = PolicySet { mode, tables };
    if config.num_rl_agents > 0 && !policies.fits(config.num_rl_agents) {
        return Err("table count does not match the agent count".into());
    }
    Ok(TrainedPolicySet { policies, config, final_epsilon, episodes_trained })
}

pub fn read(path: &Path) -> Result<TrainedPolicySet, Error> {
    let bytes = fs::read(path).at(path)?;
    decode(&bytes).map_err(|reason| Error::Policy { path: path.to_path_buf(), reason })
}

pub fn write(path: &Path, set: &TrainedPolicySet) -> Result<(), Error> {
    fs::write(path, encode(set)).at(path)
}
