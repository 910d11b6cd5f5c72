use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{KnowledgeGraph, Triple, Vocabulary};
use crate::error::{Error, Result};

/// Reads a `head<TAB>relation<TAB>tail` file.
///
/// Without `vocab` a fresh vocabulary is built from the file. With `vocab`
/// its ids are reused, new entities are appended, and unknown relations are
/// an error. The returned graph spans the whole (possibly extended) entity
/// vocabulary.
pub fn load_triples(path: impl AsRef<Path>, vocab: Option<&Vocabulary>) -> Result<(KnowledgeGraph, Vocabulary)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_triples(BufReader::new(file), path, vocab)
}

/// Same as [`load_triples`] over any buffered reader. `source` is only used
/// in error messages.
pub fn parse_triples(
    reader: impl BufRead,
    source: &Path,
    vocab: Option<&Vocabulary>,
) -> Result<(KnowledgeGraph, Vocabulary)> {
    let extend = vocab.is_some();
    let mut vocab = vocab.cloned().unwrap_or_default();
    let mut triples = Vec::new();
    let mut seen = HashSet::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::MalformedLine {
                path: source.to_owned(),
                line: lineno + 1,
                found: fields.len(),
            });
        }
        let (h, r, t) = (fields[0], fields[1], fields[2]);
        let rel = if extend {
            vocab.relation_id(r).ok_or_else(|| Error::UnknownRelation {
                path: source.to_owned(),
                line: lineno + 1,
                relation: r.to_owned(),
            })?
        } else {
            vocab.intern_relation(r)
        };
        let head = vocab.intern_entity(h);
        let tail = vocab.intern_entity(t);
        let triple = Triple { head, rel, tail };
        if !seen.insert(triple) {
            return Err(Error::DuplicateTriple {
                path: source.to_owned(),
                line: lineno + 1,
                head: h.to_owned(),
                relation: r.to_owned(),
                tail: t.to_owned(),
            });
        }
        triples.push(triple);
    }

    let graph = KnowledgeGraph::from_triples(vocab.n_entities(), vocab.n_relations(), triples)?;
    Ok((graph, vocab))
}

/// Writes triples back out as TSV using the vocabulary's tokens.
pub fn write_triples(path: impl AsRef<Path>, triples: &[Triple], vocab: &Vocabulary) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in triples {
        let h = vocab.entity_name(t.head).ok_or(Error::UnknownEntity(t.head.0))?;
        let r = vocab.relation_name(t.rel).ok_or(Error::UnknownRelationId(t.rel.0))?;
        let tl = vocab.entity_name(t.tail).ok_or(Error::UnknownEntity(t.tail.0))?;
        writeln!(w, "{h}\t{r}\t{tl}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `entities.tsv` and `relations.tsv` (`token<TAB>id`) into `dir`.
pub fn write_vocab_files(dir: impl AsRef<Path>, vocab: &Vocabulary) -> Result<()> {
    let dir = dir.as_ref();
    write_token_file(&dir.join("entities.tsv"), vocab.entities())?;
    write_token_file(&dir.join("relations.tsv"), vocab.relations())
}

fn write_token_file(path: &Path, tokens: &[String]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, tok) in tokens.iter().enumerate() {
        writeln!(w, "{tok}\t{id}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a `token<TAB>id` file, checking that ids are exactly `0..n` in order.
pub fn read_vocab_file(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let (tok, id) = line.rsplit_once('\t').ok_or_else(|| Error::MalformedLine {
            path: path.to_owned(),
            line: lineno + 1,
            found: 1,
        })?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| Error::InvalidData(format!("{}:{}: bad id `{id}`", path.display(), lineno + 1)))?;
        if id != tokens.len() {
            return Err(Error::InvalidData(format!(
                "{}:{}: ids must be contiguous, expected {} got {id}",
                path.display(),
                lineno + 1,
                tokens.len()
            )));
        }
        tokens.push(tok.to_owned());
    }
    Ok(tokens)
}

impl Vocabulary {
    /// Vocabulary that knows only the given relations, in id order.
    pub fn with_relations<S: AsRef<str>>(relations: &[S]) -> Self {
        let mut v = Vocabulary::new();
        for r in relations {
            v.intern_relation(r.as_ref());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, vocab: Option<&Vocabulary>) -> Result<(KnowledgeGraph, Vocabulary)> {
        parse_triples(Cursor::new(text.as_bytes()), Path::new("mem"), vocab)
    }

    #[test]
    fn empty_input_is_a_valid_degenerate_graph() {
        let (g, v) = parse("", None).unwrap();
        assert_eq!(g.len(), 0);
        assert_eq!(g.n_entities(), 0);
        assert_eq!(v.n_relations(), 0);
    }

    #[test]
    fn duplicate_line_is_rejected() {
        let err = parse("A\tr0\tB\nA\tr0\tB\n", None).unwrap_err();
        assert!(matches!(err, Error::DuplicateTriple { line: 2, .. }), "{err}");
    }

    #[test]
    fn wrong_field_count_is_rejected() {
        let err = parse("A\tr0\tB\nA r0 B\n", None).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, found: 1, .. }));
    }

    #[test]
    fn ids_follow_first_seen_order() {
        let (g, v) = parse("A\tr0\tB\nC\tr1\tA\n", None).unwrap();
        assert_eq!(v.entities(), ["A", "B", "C"]);
        assert_eq!(v.relations(), ["r0", "r1"]);
        assert_eq!(g.triples()[1], Triple::new(2, 1, 0));
    }

    #[test]
    fn extending_reuses_ids_and_rejects_new_relations() {
        let (_, mut v) = parse("A\tr0\tB\n", None).unwrap();
        v.mark_boundary();
        let (g2, v2) = parse("X\tr0\tY\n", Some(&v)).unwrap();
        assert_eq!(v2.entity_id("A").unwrap().0, 0);
        assert_eq!(v2.entity_id("X").unwrap().0, 2);
        assert_eq!(v2.boundary(), Some(2));
        assert_eq!(g2.n_entities(), 4);
        let err = parse("X\tr9\tY\n", Some(&v)).unwrap_err();
        assert!(matches!(err, Error::UnknownRelation { .. }));
    }

    #[test]
    fn crlf_is_tolerated() {
        let (g, _) = parse("A\tr0\tB\r\nB\tr0\tC\r\n", None).unwrap();
        assert_eq!(g.len(), 2);
    }
}
