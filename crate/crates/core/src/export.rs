//! Plain CSV writing shared by every artifact.
//!
//! Numbers use Rust's shortest round-trip formatting, so identical inputs give
//! byte-identical files. Artifacts may start with `# key: value` comment lines;
//! the first of them is conventionally the config digest.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

pub fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// Appends one comma-separated row and a newline.
pub fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

/// Prefixes `body` with `# key: value` lines.
pub fn with_header(meta: &[(&str, String)], body: &str) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str(body);
    out
}

/// Reads the `# key: value` lines at the top of an artifact.
pub fn read_header(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(": ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}
