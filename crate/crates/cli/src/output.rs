use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use qfpsim::io::{OutputFormat, Table};
use qfpsim::Result;
use serde_json::Value;

pub struct Output {
    format: OutputFormat,
    dir: Option<PathBuf>,
    printed: usize,
}

impl Output {
    pub fn new(format: OutputFormat, dir: Option<PathBuf>) -> Self {
        Output { format, dir, printed: 0 }
    }

    /// Prints `table` under a `# name` line (a `table` field in JSON lines)
    /// and writes `name.<ext>` to the output directory if there is one.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        let stdout = std::io::stdout();
        let mut w = stdout.lock();
        match self.format {
            OutputFormat::JsonLines => {
                let mut tagged = Table::new(&["table"]);
                tagged.columns.extend(table.columns.iter().cloned());
                for r in &table.rows {
                    let mut row = vec![Value::from(name)];
                    row.extend(r.iter().cloned());
                    tagged.rows.push(row);
                }
                tagged.write(self.format, &mut w)?;
            }
            _ => {
                if self.printed > 0 {
                    writeln!(w)?;
                }
                writeln!(w, "# {name}")?;
                table.write(self.format, &mut w)?;
            }
        }
        w.flush()?;
        self.printed += 1;
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)?;
            let f = File::create(dir.join(format!("{name}.{}", self.format.extension())))?;
            let mut f = BufWriter::new(f);
            table.write(self.format, &mut f)?;
            f.flush()?;
        }
        Ok(())
    }

    /// Writes an auxiliary file to the output directory; skipped without one.
    pub fn file<F>(&self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let mut f = BufWriter::new(File::create(dir.join(name))?);
        write(&mut f)?;
        f.flush()?;
        Ok(())
    }
}
