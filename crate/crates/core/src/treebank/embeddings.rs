//! Pretrained word-vector files in the plain text format
//! `token v1 v2 ... vd`, one token per line.

use super::vocab::Vocab;
use super::TreebankError;
use crate::tensor::Tensor;
use rand::Rng;
use std::path::Path;

/// Builds the `|V| x dim` embedding table for `words`.
///
/// Every row is first drawn from `U[-0.05, 0.05)` (in row order, so the
/// result is reproducible for a fixed vocabulary and seed), then rows whose
/// token appears in the file are overwritten with the file values.  Tokens
/// in the file but not in the vocabulary are skipped.  Returns the table and
/// the number of vocabulary entries found in the file.
pub fn load_embeddings<R: Rng + ?Sized>(
    path: &Path,
    words: &Vocab,
    dim: usize,
    rng: &mut R,
) -> Result<(Tensor, usize), TreebankError> {
    let mut table = Tensor::uniform(&[words.len(), dim], -0.05, 0.05, rng);
    let text = std::fs::read_to_string(path).map_err(|source| TreebankError::Io {
        path: path.to_path_buf(),
        source,
    })?;

    let mut found = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let Some(token) = fields.next() else { continue };
        if !words.contains(token) {
            continue;
        }
        let row = words.lookup(token);
        let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let values = values.map_err(|e| TreebankError::Data {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: format!("bad vector component for {token:?}: {e}"),
        })?;
        if values.len() != dim {
            return Err(TreebankError::Data {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "vector for {token:?} has {} components, expected {dim}",
                    values.len()
                ),
            });
        }
        table.data_mut()[row * dim..(row + 1) * dim].copy_from_slice(&values);
        found += 1;
    }
    Ok((table, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write as _;

    fn vocab(tokens: &[&str]) -> Vocab {
        let mut v = Vocab::new();
        for t in tokens {
            v.intern(t);
        }
        v
    }

    fn write_file(dir: &tempfile::TempDir, content: &str) -> std::path::PathBuf {
        let path = dir.path().join("vectors.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn file_rows_are_read_back_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "good 0.1 -0.25 3.5\nfilm 1.0 2.0 3.0\nextra 9 9 9\n");
        let words = vocab(&["good", "film"]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (table, found) = load_embeddings(&path, &words, 3, &mut rng).unwrap();
        assert_eq!(found, 2);
        let good = words.lookup("good");
        assert_eq!(
            &table.data()[good * 3..good * 3 + 3],
            &["0.1".parse::<f64>().unwrap(), -0.25, 3.5]
        );
        let film = words.lookup("film");
        assert_eq!(&table.data()[film * 3..film * 3 + 3], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn missing_tokens_get_reproducible_uniform_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "");
        let words = vocab(&["a", "b"]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            load_embeddings(&path, &words, 4, &mut rng).unwrap()
        };
        let (t1, found) = run(9);
        let (t2, _) = run(9);
        assert_eq!(found, 0);
        assert_eq!(t1, t2);
        assert!(t1.data().iter().all(|v| (-0.05..0.05).contains(v)));
        let (t3, _) = run(10);
        assert_ne!(t1, t3);
    }

    #[test]
    fn unk_row_comes_from_file_when_present() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "<unk> 7.0 8.0\n");
        let words = vocab(&["a"]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (table, found) = load_embeddings(&path, &words, 2, &mut rng).unwrap();
        assert_eq!(found, 1);
        assert_eq!(&table.data()[0..2], &[7.0, 8.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "a 1.0 2.0\n");
        let words = vocab(&["a"]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = load_embeddings(&path, &words, 3, &mut rng).unwrap_err();
        assert!(err.to_string().contains("2 components, expected 3"), "{err}");
    }

    #[test]
    fn bad_number_is_an_error_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "b 1.0\na 1.0x\n");
        let words = vocab(&["a", "b"]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = load_embeddings(&path, &words, 1, &mut rng).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }
}
