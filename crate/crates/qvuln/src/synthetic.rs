//! Seeded generator for a small, linearly separable C corpus. Vulnerable
//! functions copy into fixed buffers with unbounded calls; safe ones use the
//! bounded counterparts. Everything else is shared filler, and every function
//! has two filler statements so lengths stay within a few tokens.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use qvuln_core::text::Sample;
use qvuln_core::training::rng;

use crate::error::{Error, Result};

const UNSAFE: [&str; 5] = [
    "strcpy(buf, src);",
    "gets(buf);",
    "sprintf(buf, \"%s\", src);",
    "strcat(buf, src);",
    "memcpy(buf, src, strlen(src));",
];

const SAFE: [&str; 4] = [
    "strncpy(buf, src, sizeof(buf) - 1);",
    "fgets(buf, sizeof(buf), stdin);",
    "snprintf(buf, sizeof(buf), \"%s\", src);",
    "strncat(buf, src, sizeof(buf) - strlen(buf) - 1);",
];

const FILLER: [&str; 6] = [
    "int n = 0;",
    "n += 1;",
    "if (n > 3) return -1;",
    "n = n * 2;",
    "log_debug(\"step\");",
    "check(src);",
];

const NAMES: [&str; 6] = ["copy_name", "read_line", "handle", "parse_arg", "store", "fmt_msg"];

fn function<R: Rng>(vulnerable: bool, r: &mut R) -> String {
    let mut body: Vec<&str> = Vec::new();
    for _ in 0..2 {
        body.push(FILLER.choose(r).unwrap());
    }
    let call = if vulnerable { UNSAFE.choose(r) } else { SAFE.choose(r) };
    body.insert(r.gen_range(0..=body.len()), call.unwrap());
    format!(
        "void {}(char *src) {{ char buf[{}]; {} }}",
        NAMES.choose(r).unwrap(),
        [8, 16, 32, 64].choose(r).unwrap(),
        body.join(" ")
    )
}

/// `n` samples, alternating labels (exactly balanced for even `n`).
pub fn generate(n: usize, seed: u64) -> Vec<Sample> {
    let mut r = rng(seed);
    (0..n)
        .map(|k| {
            let label = (k % 2) as i64;
            Sample::new(function(label == 1, &mut r), label).expect("label is 0 or 1")
        })
        .collect()
}

/// Writes samples as a `code,label` CSV file.
pub fn write_csv(path: &Path, samples: &[Sample]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let err = |e: csv::Error| Error::format(path, 0, e.to_string());
    w.write_record(["code", "label"]).map_err(err)?;
    for s in samples {
        w.write_record([s.code.as_str(), if s.label == 1 { "1" } else { "0" }])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let mut inner = w.into_inner().map_err(|e| Error::format(path, 0, e.to_string()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

/// Writes `train.csv`, `validation.csv` and `test.csv` under `dir`.
pub fn write_splits(dir: &Path, train: usize, validation: usize, test: usize, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (k, (name, n)) in [("train", train), ("validation", validation), ("test", test)].into_iter().enumerate() {
        write_csv(&dir.join(format!("{name}.csv")), &generate(n, seed.wrapping_add(100 * k as u64)))?;
    }
    Ok(())
}
