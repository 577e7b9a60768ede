//! Plain-text checkpoints.
//!
//! ```text
//! vqt-checkpoint v1
//! config vocab=100
//! config seq_len=6
//! ...
//! tensor tok_emb 100 32
//! <one line of space-separated values per row>
//! ...
//! end
//! ```
//!
//! Values use the shortest decimal form that parses back to the same `f64`,
//! so a save/load round trip is exact.

use std::io::{BufRead, Write};

use ndarray::Array2;

use super::config::ModelConfig;
use super::params::ModelParams;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "vqt-checkpoint v1";

pub fn save_checkpoint<W: Write>(mut w: W, cfg: &ModelConfig, params: &ModelParams) -> std::io::Result<()> {
    writeln!(w, "{CHECKPOINT_MAGIC}")?;
    for (k, v) in cfg.to_pairs() {
        writeln!(w, "config {k}={v}")?;
    }
    for p in params.params() {
        let (r, c) = p.value.dim();
        writeln!(w, "tensor {} {r} {c}", p.name)?;
        for row in p.value.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    writeln!(w, "end")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn load_checkpoint<R: BufRead>(r: R) -> Result<(ModelConfig, ModelParams)> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = move || -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((n, Err(e))) => Err(parse_err(n, e.to_string())),
            None => Err(parse_err(0, "unexpected end of checkpoint")),
        }
    };
    let (n, magic) = next()?;
    if magic.trim() != CHECKPOINT_MAGIC {
        return Err(parse_err(n, format!("expected '{CHECKPOINT_MAGIC}'")));
    }
    let mut cfg = ModelConfig::default();
    let mut line = next()?;
    while let Some(kv) = line.1.strip_prefix("config ") {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| parse_err(line.0, "config line without '='"))?;
        cfg.set(k, v).map_err(|e| parse_err(line.0, e.to_string()))?;
        line = next()?;
    }
    cfg.validate().map_err(|e| parse_err(line.0, e.to_string()))?;
    let mut params = ModelParams::init(&cfg, 0)?;
    for p in params.params_mut() {
        let (n, header) = &line;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let want = p.value.dim();
        match fields.as_slice() {
            ["tensor", name, r, c] if *name == p.name => {
                let dims = (r.parse::<usize>(), c.parse::<usize>());
                if dims != (Ok(want.0), Ok(want.1)) {
                    return Err(parse_err(*n, format!("tensor {name} should be {}×{}", want.0, want.1)));
                }
            }
            _ => return Err(parse_err(*n, format!("expected header of tensor {}", p.name))),
        }
        let mut values = Array2::zeros(want);
        for r in 0..want.0 {
            let (n, row) = next()?;
            let parsed: Vec<f64> = row
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|_| parse_err(n, format!("bad number '{s}'"))))
                .collect::<Result<_>>()?;
            if parsed.len() != want.1 {
                return Err(parse_err(
                    n,
                    format!("row has {} values, expected {}", parsed.len(), want.1),
                ));
            }
            for (c, v) in parsed.into_iter().enumerate() {
                values[[r, c]] = v;
            }
        }
        p.value = values;
        line = next()?;
    }
    if line.1.trim() != "end" {
        return Err(parse_err(line.0, "expected 'end'"));
    }
    Ok((cfg, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let cfg = ModelConfig {
            vocab: 12,
            d_model: 4,
            d_ff: 6,
            d_mlp: 5,
            nq_addr: 1,
            nq_data: 2,
            ..ModelConfig::default()
        };
        let p = ModelParams::init(&cfg, 7).unwrap();
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &cfg, &p).unwrap();
        let (c2, p2) = load_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(cfg, c2);
        assert_eq!(p, p2);
    }

    #[test]
    fn corrupt_files_name_the_line() {
        assert!(matches!(
            load_checkpoint("nope\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let cfg = ModelConfig {
            vocab: 3,
            d_model: 2,
            d_ff: 2,
            d_mlp: 2,
            nq_addr: 0,
            nq_data: 1,
            ..ModelConfig::default()
        };
        let p = ModelParams::init(&cfg, 7).unwrap();
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, &cfg, &p).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replacen("tensor pos_emb", "tensor pos", 1);
        assert!(load_checkpoint(text.as_bytes()).is_err());
    }
}
