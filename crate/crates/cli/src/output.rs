// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use gauss_packing::record::JsonLine;

use crate::args::Format;

/// One record in each output format.
pub struct Row {
    pub json: JsonLine,
    pub csv: Vec<String>,
    pub human: String,
}

pub struct Output {
    sink: Box<dyn Write>,
    format: Format,
    timestamp: Option<u64>,
}

impl Output {
    pub fn open(path: Option<&Path>, format: Format, timestamp: bool) -> io::Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let timestamp = timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Ok(Self {
            sink,
            format,
            timestamp,
        })
    }

    pub fn table(&mut self, header: &[&str], rows: Vec<Row>) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                writeln!(self.sink, "{}", header.join(","))?;
                for row in rows {
                    writeln!(self.sink, "{}", row.csv.join(","))?;
                }
            }
            Format::JsonLines => {
                for row in rows {
                    let json = match self.timestamp {
                        Some(t) => row.json.int("timestamp", t),
                        None => row.json,
                    };
                    writeln!(self.sink, "{}", json.finish())?;
                }
            }
            Format::Human => {
                if let Some(t) = self.timestamp {
                    writeln!(self.sink, "# generated at unix time {t}")?;
                }
                for row in rows {
                    writeln!(self.sink, "{}", row.human)?;
                }
            }
        }
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.sink.flush()
    }
}
