//! Opening plain or gzip-compressed text inputs.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use flate2::read::MultiGzDecoder;

/// Open `path` for line reading, transparently decompressing `.gz` files.
pub fn open_text(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Read a whole (possibly compressed) file into a string.
pub fn read_to_string(path: &Path) -> io::Result<String> {
    let mut reader = open_text(path)?;
    let mut text = String::new();
    io::Read::read_to_string(&mut reader, &mut text)?;
    Ok(text)
}
