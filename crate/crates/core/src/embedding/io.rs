//! Embedding text format: first line `V dim`, then one `word v1 .. v_dim`
//! line per word with 9-significant-digit decimals.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::EmbeddingMatrix;

/// Write the input vectors of a matrix. Output (context) vectors are
/// training state and are not persisted.
pub fn save_embeddings(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if matrix.is_empty() {
        return Err(Error::NoVectors);
    }
    for word in matrix.words() {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "word {word:?} cannot be serialized (empty or contains whitespace)"
            )));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = format!("{} {}\n", matrix.len(), matrix.dim());
    w.write_all(line.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    for id in 0..matrix.len() as u32 {
        line.clear();
        line.push_str(matrix.word(id));
        for x in matrix.input_vector(id) {
            line.push(' ');
            line.push_str(&format!("{x:.8e}"));
        }
        line.push('\n');
        w.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a file written by [`save_embeddings`]. The loaded matrix has the
/// stored input vectors and zeroed output vectors.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let mut parts = header.split(' ');
    let (v, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(v), Some(d), None) => {
            let v: usize = v
                .parse()
                .map_err(|_| Error::parse(path, 1, "vector count is not an integer"))?;
            let d: usize = d
                .parse()
                .map_err(|_| Error::parse(path, 1, "dimension is not an integer"))?;
            (v, d)
        }
        _ => return Err(Error::parse(path, 1, "expected header <count> <dim>")),
    };
    if v == 0 {
        return Err(Error::NoVectors);
    }
    if dim == 0 {
        return Err(Error::parse(path, 1, "dimension must be positive"));
    }

    let mut words = Vec::with_capacity(v);
    let mut input = Vec::with_capacity(v * dim);
    let mut seen = std::collections::HashSet::with_capacity(v);
    for _ in 0..v {
        let (idx, line) = lines.next().ok_or_else(|| {
            Error::parse(
                path,
                0,
                format!("header declares {v} vectors but the file has fewer rows"),
            )
        })?;
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split(' ');
        let word = fields
            .next()
            .filter(|w| !w.is_empty())
            .ok_or_else(|| Error::parse(path, line_no, "missing word"))?;
        if !seen.insert(word.to_owned()) {
            return Err(Error::parse(
                path,
                line_no,
                format!("duplicate word {word:?}"),
            ));
        }
        let mut count = 0;
        for field in fields {
            let x: f64 = field.parse().map_err(|_| {
                Error::parse(
                    path,
                    line_no,
                    format!("component {field:?} is not a number"),
                )
            })?;
            if !x.is_finite() {
                return Err(Error::parse(path, line_no, "non-finite component"));
            }
            input.push(x);
            count += 1;
        }
        if count != dim {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {dim} components, got {count}"),
            ));
        }
        words.push(word.to_owned());
    }
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("header declares {v} vectors but the file has more rows"),
            ));
        }
    }

    let output = vec![0.0; input.len()];
    Ok(EmbeddingMatrix::new(words, dim, input, output))
}
