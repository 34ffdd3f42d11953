//! Plain-text artifact formats.
//!
//! Every artifact is a line-oriented UTF-8 file with a leading version
//! header, written atomically (temp file in the same directory, then rename)
//! so a crash never leaves a half-written file behind. Floats print in
//! Rust's shortest round-trip form, which makes save -> load -> save
//! byte-identical and loses no precision.
//!
//! The trajectory database splits across two files: `db` holds per-step
//! scalars plus the *current* encoding of each observation (a derived view,
//! recomputed at save time and ignored on load), while `masks` holds the raw
//! observations the encodings came from.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::encoder::{encode, EncoderParams, FitMeta};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::memory::{Episode, Phase, StepRecord, Termination, TrajectoryDB};
use crate::pipeline::{CurvePoint, Metrics};
use crate::planner::Decision;
use crate::sim::{Action, Mask, Observation, Track};

pub const TRACK_VERSION: &str = "epiplan-track v1";
pub const DB_VERSION: &str = "epiplan-db v1";
pub const MASKS_VERSION: &str = "epiplan-masks v1";
pub const ENCODER_VERSION: &str = "epiplan-encoder v1";
pub const METRICS_VERSION: &str = "epiplan-metrics v1";
pub const CURVE_VERSION: &str = "# epiplan-curve v1";
pub const TRACE_VERSION: &str = "epiplan-trace v1";

const METRICS_HEADER: &str = "agent success_rate avg_speed_kmh episodes env_interactions";

/// Writes `bytes` to `path` through a temporary sibling file and a rename,
/// creating parent directories as needed.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Sequential line reader that remembers its position for error messages.
struct Reader<'a> {
    path: &'a Path,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn new(path: &'a Path, text: &'a str) -> Reader<'a> {
        Reader {
            path,
            lines: text.lines().enumerate(),
            line_no: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.path, self.line_no, message)
    }

    fn next_line(&mut self) -> Result<&'a str> {
        match self.lines.next() {
            Some((idx, line)) => {
                self.line_no = idx + 1;
                Ok(line)
            }
            None => Err(Error::parse(
                self.path,
                self.line_no + 1,
                "unexpected end of file",
            )),
        }
    }

    fn expect_version(&mut self, expected: &str) -> Result<()> {
        let line = self.next_line()?;
        if line.trim() != expected {
            return Err(Error::VersionMismatch {
                path: self.path.to_path_buf(),
                found: line.trim().to_string(),
                expected: expected.to_string(),
            });
        }
        Ok(())
    }

    /// Reads a `key value...` line and returns the value part.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(self.err(format!("expected `{key} <value>`, got `{line}`"))),
        }
    }

    fn keyed_parse<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.keyed(key)?;
        v.parse()
            .map_err(|_| self.err(format!("cannot parse `{v}` as {key}")))
    }

    /// Confirms nothing but blank lines remain.
    fn expect_end(&mut self) -> Result<()> {
        for (idx, line) in self.lines.by_ref() {
            if !line.trim().is_empty() {
                self.line_no = idx + 1;
                return Err(Error::parse(
                    self.path,
                    self.line_no,
                    "unexpected trailing content",
                ));
            }
        }
        Ok(())
    }
}

/// Parses the next whitespace-separated field of a record line.
fn take<'s, T: FromStr>(
    it: &mut impl Iterator<Item = &'s str>,
    r: &Reader,
    name: &str,
) -> Result<T> {
    let raw = it
        .next()
        .ok_or_else(|| r.err(format!("missing field `{name}`")))?;
    raw.parse()
        .map_err(|_| r.err(format!("cannot parse `{raw}` as {name}")))
}

fn take_flag<'s>(it: &mut impl Iterator<Item = &'s str>, r: &Reader, name: &str) -> Result<bool> {
    match take::<u8>(it, r, name)? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(r.err(format!("flag `{name}` must be 0 or 1, got {other}"))),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

// --- tracks ---------------------------------------------------------------

pub fn save_track(track: &Track, path: &Path) -> Result<()> {
    let mut s = String::new();
    s.push_str(TRACK_VERSION);
    s.push('\n');
    writeln!(s, "seed {}", track.seed()).unwrap();
    writeln!(s, "width {}", track.width()).unwrap();
    writeln!(s, "length {}", track.total_length()).unwrap();
    writeln!(s, "points {}", track.points().len()).unwrap();
    for p in track.points() {
        writeln!(s, "{} {}", p.x, p.y).unwrap();
    }
    atomic_write(path, s.as_bytes())
}

pub fn load_track(path: &Path) -> Result<Track> {
    let text = read(path)?;
    let mut r = Reader::new(path, &text);
    r.expect_version(TRACK_VERSION)?;
    let seed: u64 = r.keyed_parse("seed")?;
    let width: f64 = r.keyed_parse("width")?;
    let length: f64 = r.keyed_parse("length")?;
    let n: usize = r.keyed_parse("points")?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let line = r.next_line()?;
        let mut it = line.split_whitespace();
        let x: f64 = take(&mut it, &r, "x")?;
        let y: f64 = take(&mut it, &r, "y")?;
        if it.next().is_some() {
            return Err(r.err("trailing fields on point line"));
        }
        points.push(Vec2::new(x, y));
    }
    r.expect_end()?;
    let track = Track::from_centerline(points, width, seed)?;
    // The header length is redundant with the points; use it to catch
    // truncated or hand-edited files.
    if (track.total_length() - length).abs() > 1e-6 * length.max(1.0) {
        return Err(Error::parse(
            path,
            3,
            format!(
                "stored length {length} disagrees with the geometry ({})",
                track.total_length()
            ),
        ));
    }
    Ok(track)
}

// --- trajectory database ---------------------------------------------------

/// Saves the database as a `db` file (scalars plus current encodings) and a
/// `masks` file (raw observations). The encodings are recomputed from
/// `encoder` at save time; [`load_db`] ignores them, because the observations
/// reproduce them under whatever encoder is current.
pub fn save_db(
    db: &TrajectoryDB,
    encoder: &EncoderParams,
    db_path: &Path,
    masks_path: &Path,
) -> Result<()> {
    let (mask_h, mask_w) = db
        .episodes()
        .first()
        .map(|ep| {
            let m = &ep.records[0].observation.mask;
            (m.h(), m.w())
        })
        .unwrap_or((0, 0));
    let mut d = String::new();
    d.push_str(DB_VERSION);
    d.push('\n');
    writeln!(d, "gamma {}", db.gamma()).unwrap();
    writeln!(d, "dim {}", encoder.latent_dim()).unwrap();
    writeln!(d, "episodes {}", db.episodes().len()).unwrap();
    writeln!(d, "records {}", db.total_records()).unwrap();
    let mut m = String::new();
    m.push_str(MASKS_VERSION);
    m.push('\n');
    writeln!(m, "mask {mask_h} {mask_w}").unwrap();
    writeln!(m, "records {}", db.total_records()).unwrap();
    for ep in db.episodes() {
        writeln!(
            d,
            "episode {} {} {} {}",
            ep.id,
            ep.phase.as_str(),
            ep.termination.as_str(),
            ep.records.len()
        )
        .unwrap();
        for rec in &ep.records {
            let obs = &rec.observation;
            if obs.mask.h() != mask_h || obs.mask.w() != mask_w {
                return Err(Error::DimensionMismatch(format!(
                    "mask {}x{} in episode {} differs from {}x{}",
                    obs.mask.h(),
                    obs.mask.w(),
                    ep.id,
                    mask_h,
                    mask_w
                )));
            }
            let encoding = encode(obs, encoder)?;
            write!(
                d,
                "{} {} {} {} {} {} {} {}",
                rec.episode_id,
                rec.step_index,
                rec.action.steering(),
                rec.action.acceleration(),
                rec.reward,
                rec.value,
                rec.done as u8,
                rec.unsafe_flag as u8
            )
            .unwrap();
            for x in &encoding {
                write!(d, " {x}").unwrap();
            }
            d.push('\n');
            write!(m, "{} {} {} ", rec.episode_id, rec.step_index, obs.speed).unwrap();
            for &b in obs.mask.bits() {
                m.push(if b == 1 { '1' } else { '0' });
            }
            m.push('\n');
        }
    }
    atomic_write(db_path, d.as_bytes())?;
    atomic_write(masks_path, m.as_bytes())
}

/// Loads a database from its `db`/`masks` file pair, cross-checking that the
/// two files describe the same records.
pub fn load_db(db_path: &Path, masks_path: &Path) -> Result<TrajectoryDB> {
    let d_text = read(db_path)?;
    let m_text = read(masks_path)?;
    let mut rd = Reader::new(db_path, &d_text);
    let mut rm = Reader::new(masks_path, &m_text);
    rd.expect_version(DB_VERSION)?;
    let gamma: f64 = rd.keyed_parse("gamma")?;
    let dim: usize = rd.keyed_parse("dim")?;
    let n_episodes: usize = rd.keyed_parse("episodes")?;
    let n_records: usize = rd.keyed_parse("records")?;
    rm.expect_version(MASKS_VERSION)?;
    let mask_line = rm.keyed("mask")?;
    let mut it = mask_line.split_whitespace();
    let mask_h: usize = take(&mut it, &rm, "mask height")?;
    let mask_w: usize = take(&mut it, &rm, "mask width")?;
    let m_records: usize = rm.keyed_parse("records")?;
    if m_records != n_records {
        return Err(rm.err(format!(
            "masks file holds {m_records} records, db file {n_records}"
        )));
    }
    let mut episodes = Vec::with_capacity(n_episodes);
    for _ in 0..n_episodes {
        let header = rd.keyed("episode")?;
        let mut it = header.split_whitespace();
        let id: u32 = take(&mut it, &rd, "episode id")?;
        let phase_raw: String = take(&mut it, &rd, "phase")?;
        let phase = Phase::from_str(&phase_raw)
            .ok_or_else(|| rd.err(format!("unknown phase `{phase_raw}`")))?;
        let term_raw: String = take(&mut it, &rd, "termination")?;
        let termination = Termination::from_str(&term_raw)
            .ok_or_else(|| rd.err(format!("unknown termination `{term_raw}`")))?;
        let count: usize = take(&mut it, &rd, "record count")?;
        let mut records = Vec::with_capacity(count);
        for step in 0..count {
            let line = rd.next_line()?;
            let mut it = line.split_whitespace();
            let episode_id: u32 = take(&mut it, &rd, "episode id")?;
            let step_index: u32 = take(&mut it, &rd, "step index")?;
            let steering: f64 = take(&mut it, &rd, "steering")?;
            let acceleration: f64 = take(&mut it, &rd, "acceleration")?;
            let reward: f64 = take(&mut it, &rd, "reward")?;
            let value: f64 = take(&mut it, &rd, "value")?;
            let done = take_flag(&mut it, &rd, "done")?;
            let unsafe_flag = take_flag(&mut it, &rd, "unsafe")?;
            for i in 0..dim {
                // Derived view; parsed only to validate the line's shape.
                let _: f64 = take(&mut it, &rd, &format!("encoding[{i}]"))?;
            }
            if it.next().is_some() {
                return Err(rd.err("trailing fields on record line"));
            }
            if episode_id != id || step_index as usize != step {
                return Err(rd.err(format!(
                    "record ids {episode_id}/{step_index} out of place in episode {id}"
                )));
            }
            let m_line = rm.next_line()?;
            let mut mit = m_line.split_whitespace();
            let m_ep: u32 = take(&mut mit, &rm, "episode id")?;
            let m_step: u32 = take(&mut mit, &rm, "step index")?;
            let speed: f64 = take(&mut mit, &rm, "speed")?;
            let bits_raw = mit
                .next()
                .ok_or_else(|| rm.err("missing mask bits"))?;
            if mit.next().is_some() {
                return Err(rm.err("trailing fields on mask line"));
            }
            if m_ep != id || m_step as usize != step {
                return Err(rm.err(format!(
                    "mask ids {m_ep}/{m_step} do not match db record {id}/{step}"
                )));
            }
            let bits = bits_raw
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(rm.err(format!("invalid mask bit `{c}`"))),
                })
                .collect::<Result<Vec<u8>>>()?;
            let mask = Mask::from_bits(mask_h, mask_w, bits)
                .ok_or_else(|| rm.err("mask bits do not match the declared shape"))?;
            records.push(StepRecord {
                episode_id,
                step_index,
                observation: Observation { mask, speed },
                action: Action::new(steering, acceleration),
                reward,
                value,
                done,
                unsafe_flag,
            });
        }
        episodes.push(Episode {
            id,
            phase,
            termination,
            records,
        });
    }
    rd.expect_end()?;
    rm.expect_end()?;
    TrajectoryDB::from_parts(gamma, episodes)
}

// --- encoder ----------------------------------------------------------------

pub fn save_encoder(encoder: &EncoderParams, path: &Path) -> Result<()> {
    let mut s = String::new();
    s.push_str(ENCODER_VERSION);
    s.push('\n');
    let meta = encoder.meta();
    writeln!(s, "kind {}", encoder.kind_name()).unwrap();
    writeln!(s, "dim {}", encoder.latent_dim()).unwrap();
    writeln!(s, "samples {}", meta.samples).unwrap();
    writeln!(s, "episodes {}", meta.episodes).unwrap();
    if let EncoderParams::Affine {
        mask_h,
        mask_w,
        out_dim,
        weights,
        ..
    } = encoder
    {
        writeln!(s, "mask {mask_h} {mask_w}").unwrap();
        let cols = mask_h * mask_w + 1;
        writeln!(s, "weights {out_dim} {cols}").unwrap();
        for row in weights.chunks(cols) {
            let mut first = true;
            for x in row {
                if !first {
                    s.push(' ');
                }
                write!(s, "{x}").unwrap();
                first = false;
            }
            s.push('\n');
        }
    }
    atomic_write(path, s.as_bytes())
}

pub fn load_encoder(path: &Path) -> Result<EncoderParams> {
    let text = read(path)?;
    let mut r = Reader::new(path, &text);
    r.expect_version(ENCODER_VERSION)?;
    let kind: String = r.keyed_parse("kind")?;
    let dim: usize = r.keyed_parse("dim")?;
    let samples: usize = r.keyed_parse("samples")?;
    let episodes: usize = r.keyed_parse("episodes")?;
    let meta = FitMeta { samples, episodes };
    match kind.as_str() {
        "moment" => {
            if dim != 2 {
                return Err(r.err(format!("moment encoder is 2-dimensional, file says {dim}")));
            }
            r.expect_end()?;
            Ok(EncoderParams::Moment { meta })
        }
        "affine" => {
            let mask_line = r.keyed("mask")?;
            let mut it = mask_line.split_whitespace();
            let mask_h: usize = take(&mut it, &r, "mask height")?;
            let mask_w: usize = take(&mut it, &r, "mask width")?;
            let weights_line = r.keyed("weights")?;
            let mut it = weights_line.split_whitespace();
            let rows: usize = take(&mut it, &r, "weight rows")?;
            let cols: usize = take(&mut it, &r, "weight cols")?;
            if rows != dim {
                return Err(r.err(format!("weights have {rows} rows but dim is {dim}")));
            }
            if cols != mask_h * mask_w + 1 {
                return Err(r.err(format!(
                    "weights have {cols} columns but the mask implies {}",
                    mask_h * mask_w + 1
                )));
            }
            let mut weights = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = r.next_line()?;
                let mut it = line.split_whitespace();
                for c in 0..cols {
                    let x: f64 = take(&mut it, &r, &format!("weight[{c}]"))?;
                    weights.push(x);
                }
                if it.next().is_some() {
                    return Err(r.err("trailing fields on weight row"));
                }
            }
            r.expect_end()?;
            Ok(EncoderParams::Affine {
                mask_h,
                mask_w,
                out_dim: rows,
                weights,
                meta,
            })
        }
        other => Err(r.err(format!("unknown encoder kind `{other}`"))),
    }
}

// --- metrics and curves -----------------------------------------------------

/// Appends one labeled metrics row, creating the file (with its header) on
/// first use and validating the header on later ones.
pub fn append_metrics(path: &Path, agent: &str, metrics: &Metrics) -> Result<()> {
    let mut text = match std::fs::read_to_string(path) {
        Ok(existing) => {
            let mut r = Reader::new(path, &existing);
            r.expect_version(METRICS_VERSION)?;
            existing
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            format!("{METRICS_VERSION}\n{METRICS_HEADER}\n")
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    writeln!(
        text,
        "{agent} {} {} {} {}",
        metrics.success_rate, metrics.avg_speed_kmh, metrics.episodes, metrics.env_interactions
    )
    .unwrap();
    atomic_write(path, text.as_bytes())
}

/// Writes the training curve as CSV with a version comment.
pub fn write_curve(path: &Path, points: &[CurvePoint]) -> Result<()> {
    let mut s = String::new();
    s.push_str(CURVE_VERSION);
    s.push('\n');
    s.push_str("episode,success_pct\n");
    for p in points {
        writeln!(s, "{},{}", p.episode, p.success_pct).unwrap();
    }
    atomic_write(path, s.as_bytes())
}

// --- decision traces ----------------------------------------------------------

/// One trace line for a planner decision: which branch fired, against what
/// threshold, the action taken, the copied point (`-` if none), and the
/// retrieved candidates as `traj:step:distance:ngrid` (`-` if none).
pub fn format_decision(episode: u32, step: u32, d: &Decision) -> String {
    let threshold = d
        .threshold
        .map(|t| t.to_string())
        .unwrap_or_else(|| "-".to_string());
    let chosen = d
        .chosen
        .map(|(t, s)| format!("{t}:{s}"))
        .unwrap_or_else(|| "-".to_string());
    let cands = if d.candidates.is_empty() {
        "-".to_string()
    } else {
        d.candidates
            .iter()
            .map(|c| format!("{}:{}:{}:{}", c.trajectory_id, c.step_index, c.distance, c.ngrid_max))
            .collect::<Vec<_>>()
            .join(";")
    };
    format!(
        "ep={episode} step={step} branch={} threshold={threshold} action={},{} chosen={chosen} cands={cands}",
        d.branch.as_str(),
        d.action.steering(),
        d.action.acceleration()
    )
}

pub fn write_traces(path: &Path, lines: &[String]) -> Result<()> {
    let mut s = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum::<usize>() + 32);
    s.push_str(TRACE_VERSION);
    s.push('\n');
    for line in lines {
        s.push_str(line);
        s.push('\n');
    }
    atomic_write(path, s.as_bytes())
}
