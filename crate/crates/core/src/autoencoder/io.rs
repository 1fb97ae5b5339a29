//! Plain-text model files.
//!
//! ```text
//! tire-autoencoder 1
//! input_dim <D>
//! hidden <h>
//! shared <s>
//! w_enc
//! <h lines of D values>
//! b_enc
//! <1 line of h values>
//! w_dec
//! <D lines of h values>
//! b_dec
//! <1 line of D values>
//! ```
//!
//! Values are space separated and written in the shortest decimal form that
//! parses back to the same `f64`, so a save/load cycle is lossless.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::AutoencoderParams;
use crate::error::{Error, Result};

const MAGIC: &str = "tire-autoencoder";
const VERSION: u32 = 1;

fn write_matrix<W: Write>(w: &mut W, name: &str, values: &[f64], cols: usize) -> Result<()> {
    writeln!(w, "{name}")?;
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| Error::Model("unexpected end of file".into()))
    }

    fn keyed(&mut self, key: &str) -> Result<usize> {
        let (n, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next().map(str::parse::<usize>), parts.next()) {
            (Some(k), Some(Ok(v)), None) if k == key => Ok(v),
            _ => Err(Error::Model(format!("line {n}: expected '{key} <integer>'"))),
        }
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<f64>> {
        let (n, line) = self.next_line()?;
        if line != name {
            return Err(Error::Model(format!("line {n}: expected section '{name}'")));
        }
        let mut out = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, line) = self.next_line()?;
            let before = out.len();
            for tok in line.split_whitespace() {
                out.push(
                    tok.parse::<f64>()
                        .map_err(|_| Error::Model(format!("line {n}: bad number '{tok}'")))?,
                );
            }
            if out.len() - before != cols {
                return Err(Error::Model(format!("line {n}: expected {cols} values")));
            }
        }
        Ok(out)
    }
}

impl AutoencoderParams {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MAGIC} {VERSION}")?;
        writeln!(w, "input_dim {}", self.input_dim)?;
        writeln!(w, "hidden {}", self.hidden)?;
        writeln!(w, "shared {}", self.shared)?;
        write_matrix(&mut w, "w_enc", &self.w_enc, self.input_dim)?;
        write_matrix(&mut w, "b_enc", &self.b_enc, self.hidden)?;
        write_matrix(&mut w, "w_dec", &self.w_dec, self.hidden)?;
        write_matrix(&mut w, "b_dec", &self.b_dec, self.input_dim)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = Lines {
            inner: text.lines().enumerate(),
        };
        let (_, header) = lines.next_line()?;
        match header.split_once(' ') {
            Some((MAGIC, v)) if v.trim().parse::<u32>() == Ok(VERSION) => {}
            Some((MAGIC, v)) => return Err(Error::Model(format!("unsupported version {v}"))),
            _ => return Err(Error::Model("missing header".into())),
        }
        let input_dim = lines.keyed("input_dim")?;
        let hidden = lines.keyed("hidden")?;
        let shared = lines.keyed("shared")?;
        let w_enc = lines.matrix("w_enc", hidden, input_dim)?;
        let b_enc = lines.matrix("b_enc", 1, hidden)?;
        let w_dec = lines.matrix("w_dec", input_dim, hidden)?;
        let b_dec = lines.matrix("b_dec", 1, input_dim)?;
        Self::from_parts(input_dim, hidden, shared, w_enc, b_enc, w_dec, b_dec)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_from(fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn save_load_is_lossless(seed in any::<u64>(), d in 1usize..8, h in 1usize..4) {
            let mut rng = SeededRng::new(seed);
            let mut p = AutoencoderParams::init(d, h, 1, &mut rng).unwrap();
            for b in p.b_dec.iter_mut() {
                *b = rng.standard_normal() * 1e-7;
            }
            let mut buf = Vec::new();
            p.write_to(&mut buf).unwrap();
            let q = AutoencoderParams::read_from(buf.as_slice()).unwrap();
            prop_assert_eq!(p, q);
        }
    }

    #[test]
    fn rejects_wrong_header_and_shapes() {
        assert!(AutoencoderParams::read_from("nope 1\n".as_bytes()).is_err());
        assert!(AutoencoderParams::read_from("tire-autoencoder 2\n".as_bytes()).is_err());
        let truncated = "tire-autoencoder 1\ninput_dim 2\nhidden 1\nshared 1\nw_enc\n0.5\n";
        assert!(matches!(
            AutoencoderParams::read_from(truncated.as_bytes()),
            Err(Error::Model(_))
        ));
    }
}
