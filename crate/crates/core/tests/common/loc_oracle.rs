//! Character-level reference counter for Java-style comments and a
//! generator of source trees to compare against.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq)]
enum State {
    Code,
    LineComment,
    Block,
}

/// Scans character by character: a line counts when it holds a
/// non-whitespace character outside `//` and `/* */` comments. Block
/// comments do not nest.
pub fn oracle_count(text: &str) -> u64 {
    let chars: Vec<char> = text.chars().collect();
    let mut state = State::Code;
    let mut has_code = false;
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c == '\n' {
            count += has_code as u64;
            has_code = false;
            if state == State::LineComment {
                state = State::Code;
            }
            i += 1;
            continue;
        }
        match state {
            State::LineComment => i += 1,
            State::Block => {
                if c == '*' && next == Some('/') {
                    state = State::Code;
                    i += 2;
                } else {
                    i += 1;
                }
            }
            State::Code => {
                if c == '/' && next == Some('/') {
                    state = State::LineComment;
                    i += 2;
                } else if c == '/' && next == Some('*') {
                    state = State::Block;
                    i += 2;
                } else {
                    if !c.is_whitespace() {
                        has_code = true;
                    }
                    i += 1;
                }
            }
        }
    }
    count + has_code as u64
}

const FRAGMENTS: &[&str] = &[
    "int x = 1;",
    "",
    "   ",
    "\t",
    "// whole-line comment",
    "    // indented comment",
    "return x; // trailing comment",
    "/* one-line block */",
    "/* block */ int y = 2;",
    "int z = 3; /* trailing block */",
    "/* opens a block",
    "   still inside /* looks nested",
    "   closes here */",
    "*/ int after = 4;",
    "/** javadoc",
    " * @param a value",
    " */",
    "a /* b */ c /* d",
    "/*/ odd */ e",
    "///",
    "String s = \"text\";",
    "}",
    "  {  ",
    "x = y / z; // division",
    "/* nested /* inner */ outer-leftover */",
];

/// Writes `files` source files (plus a few non-source files) under `dir`
/// in nested directories. Returns the expected total by the oracle.
pub fn write_tree(dir: &Path, files: usize, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    for f in 0..files {
        let sub = dir.join(format!("pkg{}/sub{}", f % 5, f % 3));
        std::fs::create_dir_all(&sub).unwrap();
        let lines = rng.random_range(0..80);
        let mut text: String = (0..lines)
            .map(|_| FRAGMENTS[rng.random_range(0..FRAGMENTS.len())])
            .collect::<Vec<_>>()
            .join(if rng.random_bool(0.2) { "\r\n" } else { "\n" });
        if rng.random_bool(0.5) {
            text.push('\n');
        }
        total += oracle_count(&text);
        std::fs::write(sub.join(format!("F{f}.java")), &text).unwrap();
        if f % 10 == 0 {
            std::fs::write(sub.join(format!("notes{f}.txt")), "int ignored = 1;\n").unwrap();
        }
    }
    total
}
