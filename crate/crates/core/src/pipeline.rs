//! Single-pass corpus builds: queries in, count tables and paraphrase lists out.

use std::io::BufRead;

use crate::counts::{apply_cutoff, CountTable, TableMeta, SYNTACTIC_CUTOFF};
use crate::paraphrase::{finalize_paraphrase, ParaphraseLists, TOP_EDGE, TOP_MID};
use crate::parser::Resources;
use crate::query::QuerySet;
use crate::surface::{scan_lines, CorpusFormat, ScanError, ScanStats, SurfaceQueries};
use crate::syntactic::{scan_syngram_lines, SyntacticQueries, UnaryMode};

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceBuild {
    pub table: CountTable,
    pub paraphrase: ParaphraseLists,
    pub stats: ScanStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntacticBuild {
    /// Counts after the frequency cutoff.
    pub table: CountTable,
    pub words: ParaphraseLists,
    pub tags: ParaphraseLists,
    pub stats: ScanStats,
}

pub fn build_surface<R: BufRead>(
    set: &QuerySet,
    reader: R,
    format: CorpusFormat,
    strict: bool,
    meta: TableMeta,
) -> Result<SurfaceBuild, ScanError> {
    let queries = SurfaceQueries::from_query_set(set);
    let mut acc = queries.new_accumulator();
    let stats = scan_lines(reader, format, &queries, &mut acc, strict)?;
    Ok(SurfaceBuild {
        table: acc.to_table(&queries, meta),
        paraphrase: finalize_paraphrase(&acc.paraphrase(&queries), TOP_MID, TOP_EDGE),
        stats,
    })
}

pub fn build_syntactic<R: BufRead>(
    set: &QuerySet,
    reader: R,
    mode: UnaryMode,
    strict: bool,
    meta: TableMeta,
) -> Result<SyntacticBuild, ScanError> {
    let queries = SyntacticQueries::from_query_set(set).with_unary_mode(mode);
    let mut acc = queries.new_accumulator();
    let stats = scan_syngram_lines(reader, &queries, &mut acc, strict)?;
    Ok(SyntacticBuild {
        table: apply_cutoff(&acc.to_table(meta), SYNTACTIC_CUTOFF),
        words: finalize_paraphrase(&acc.words, TOP_MID, TOP_EDGE),
        tags: finalize_paraphrase(&acc.tags, TOP_MID, TOP_EDGE),
        stats,
    })
}

/// Every table the parser can consume.
pub fn resources(surface: Option<SurfaceBuild>, syntactic: Option<SyntacticBuild>) -> Resources {
    let mut r = Resources::default();
    if let Some(s) = surface {
        r.surface = Some(s.table);
        r.surface_paraphrase = Some(s.paraphrase);
    }
    if let Some(s) = syntactic {
        r.syntactic = Some(s.table);
        r.syntactic_words = Some(s.words);
        r.syntactic_tags = Some(s.tags);
    }
    r
}
