//! Model files: a text header followed by length-prefixed sections.
//!
//! ```text
//! ngramdep-model 1
//! section meta <bytes>
//! <payload>
//! section alphabet <bytes>
//! ...
//! end
//! ```
//!
//! Section payloads: `meta` and `tagger` are tab-separated text, `provenance`
//! is free text, `alphabet` is a u32 count followed by u32-length-prefixed
//! UTF-8 strings, and `weights`/`averaged` are a u64 count followed by f64
//! bit patterns. All integers are little-endian.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::conll::Punctuation;
use crate::scalar::Scalar;

use super::alphabet::Alphabet;
use super::features::FeatureGroups;
use super::model::Model;
use super::tagger::UnigramTagger;
use super::{ParserError, TrainConfig};

const MAGIC: &str = "ngramdep-model 1";
const SECTIONS: [&str; 6] = ["meta", "provenance", "alphabet", "weights", "averaged", "tagger"];

fn format_err(msg: impl Into<String>) -> ParserError {
    ParserError::Format(msg.into())
}

fn meta_text<S: Scalar>(model: &Model<S>) -> String {
    let c = &model.config;
    let punct = match c.punctuation.tags() {
        Some(tags) => format!("tags:{}", tags.join(" ")),
        None => "form".to_owned(),
    };
    let rows = [
        ("scalar", S::NAME.to_owned()),
        ("order", c.order.to_string()),
        ("training-k", c.k.to_string()),
        ("iters", c.iters.to_string()),
        ("loss-type", c.loss.to_string()),
        ("single-root", c.single_root.to_string()),
        ("punctuation", punct),
        ("groups", c.groups.to_list()),
        ("features", model.alphabet.len().to_string()),
    ];
    rows.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
}

fn alphabet_bytes(alphabet: &Alphabet) -> Vec<u8> {
    let mut out = (alphabet.len() as u32).to_le_bytes().to_vec();
    for name in alphabet.names() {
        out.extend((name.len() as u32).to_le_bytes());
        out.extend(name.as_bytes());
    }
    out
}

fn weight_bytes<S: Scalar>(w: &[S]) -> Vec<u8> {
    let mut out = (w.len() as u64).to_le_bytes().to_vec();
    for x in w {
        out.extend(x.as_f64().to_bits().to_le_bytes());
    }
    out
}

fn tagger_text(tagger: &UnigramTagger) -> String {
    let mut out = format!("\t{}\n", tagger.default_tag());
    for (w, t) in tagger.entries() {
        out.push_str(&format!("{w}\t{t}\n"));
    }
    out
}

pub fn write_model<S: Scalar, W: Write>(model: &Model<S>, sink: &mut W) -> Result<(), ParserError> {
    let payloads: [Vec<u8>; 6] = [
        meta_text(model).into_bytes(),
        model.provenance.clone().into_bytes(),
        alphabet_bytes(&model.alphabet),
        weight_bytes(&model.weights),
        weight_bytes(&model.averaged),
        tagger_text(&model.tagger).into_bytes(),
    ];
    writeln!(sink, "{MAGIC}")?;
    for (name, payload) in SECTIONS.iter().zip(payloads) {
        writeln!(sink, "section {name} {}", payload.len())?;
        sink.write_all(&payload)?;
        writeln!(sink)?;
    }
    writeln!(sink, "end")?;
    Ok(())
}

pub fn model_to_bytes<S: Scalar>(model: &Model<S>) -> Vec<u8> {
    let mut out = Vec::new();
    write_model(model, &mut out).expect("writing to memory");
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Result<&'a str, ParserError> {
        let rest = &self.data[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| format_err("truncated header line"))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| format_err("header is not UTF-8"))
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], ParserError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.data.len()).ok_or_else(|| format_err("truncated section"))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, ParserError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, ParserError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn parse_alphabet(data: &[u8]) -> Result<Alphabet, ParserError> {
    let mut c = Cursor { data, pos: 0 };
    let count = c.u32()? as usize;
    let mut names = Vec::with_capacity(count.min(data.len()));
    for _ in 0..count {
        let len = c.u32()? as usize;
        let s = std::str::from_utf8(c.take(len)?).map_err(|_| format_err("feature name is not UTF-8"))?;
        names.push(s.to_owned());
    }
    if c.pos != data.len() {
        return Err(format_err("trailing bytes in alphabet"));
    }
    if names.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format_err("alphabet is not sorted"));
    }
    Ok(Alphabet::from_names(names))
}

fn parse_weights<S: Scalar>(data: &[u8]) -> Result<Vec<S>, ParserError> {
    let mut c = Cursor { data, pos: 0 };
    let count = c.u64()? as usize;
    if data.len() != 8 + count.saturating_mul(8) {
        return Err(format_err("weight section length mismatch"));
    }
    (0..count).map(|_| Ok(S::of(f64::from_bits(c.u64()?)))).collect()
}

fn text(data: &[u8]) -> Result<&str, ParserError> {
    std::str::from_utf8(data).map_err(|_| format_err("section is not UTF-8"))
}

fn parse_config(meta: &BTreeMap<&str, &str>, scalar: &str) -> Result<TrainConfig, ParserError> {
    let get = |k: &str| meta.get(k).copied().ok_or_else(|| format_err(format!("missing meta field {k}")));
    if get("scalar")? != scalar {
        return Err(format_err(format!("model stores {} weights, expected {scalar}", get("scalar")?)));
    }
    let num = |k: &str| get(k)?.parse::<usize>().map_err(|_| format_err(format!("bad meta field {k}")));
    let punctuation = match get("punctuation")? {
        "form" => Punctuation::by_form(),
        other => match other.strip_prefix("tags:") {
            Some(tags) => Punctuation::by_tags(tags.split(' ').filter(|t| !t.is_empty())),
            None => return Err(format_err("bad punctuation rule")),
        },
    };
    let config = TrainConfig {
        order: num("order")? as u8,
        k: num("training-k")?,
        iters: num("iters")?,
        loss: get("loss-type")?.parse()?,
        single_root: get("single-root")?.parse().map_err(|_| format_err("bad single-root"))?,
        punctuation,
        groups: FeatureGroups::from_list(get("groups")?).ok_or_else(|| format_err("bad feature groups"))?,
    };
    config.validate()?;
    Ok(config)
}

pub fn model_from_bytes<S: Scalar>(data: &[u8]) -> Result<Model<S>, ParserError> {
    let mut c = Cursor { data, pos: 0 };
    if c.line()? != MAGIC {
        return Err(format_err("not a model file"));
    }
    let mut payloads: Vec<&[u8]> = Vec::new();
    for name in SECTIONS {
        let header = c.line()?;
        let len = header
            .strip_prefix(&format!("section {name} "))
            .and_then(|l| l.parse::<usize>().ok())
            .ok_or_else(|| format_err(format!("expected section {name}")))?;
        payloads.push(c.take(len)?);
        if c.take(1)? != b"\n" {
            return Err(format_err(format!("section {name} not terminated")));
        }
    }
    if c.line()? != "end" || c.pos != data.len() {
        return Err(format_err("missing end marker"));
    }
    let meta: BTreeMap<&str, &str> = text(payloads[0])?.lines().filter_map(|l| l.split_once('\t')).collect();
    let config = parse_config(&meta, S::NAME)?;
    let alphabet = parse_alphabet(payloads[2])?;
    let weights = parse_weights::<S>(payloads[3])?;
    let averaged = parse_weights::<S>(payloads[4])?;
    if weights.len() != alphabet.len() || averaged.len() != alphabet.len() {
        return Err(format_err("weight count differs from alphabet size"));
    }
    let mut lines = text(payloads[5])?.lines();
    let default_tag = lines
        .next()
        .and_then(|l| l.strip_prefix('\t'))
        .ok_or_else(|| format_err("missing default tag"))?;
    let mut tags = BTreeMap::new();
    for l in lines {
        let (w, t) = l.split_once('\t').ok_or_else(|| format_err("bad tagger line"))?;
        tags.insert(w.to_owned(), t.to_owned());
    }
    Ok(Model {
        alphabet,
        weights,
        averaged,
        config,
        tagger: UnigramTagger::from_parts(tags, default_tag.to_owned()),
        provenance: text(payloads[1])?.to_owned(),
    })
}

pub fn read_model<S: Scalar, R: Read>(source: &mut R) -> Result<Model<S>, ParserError> {
    let mut data = Vec::new();
    source.read_to_end(&mut data)?;
    model_from_bytes(&data)
}
