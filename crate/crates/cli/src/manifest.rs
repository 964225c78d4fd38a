use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

/// Record written next to every output set.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub command_line: Vec<String>,
    pub config_snapshot: String,
    pub outputs: Vec<String>,
    pub grids: Vec<String>,
    pub wall_clock: Duration,
}

fn quote(arg: &str) -> String {
    if !arg.is_empty() && arg.chars().all(|c| c.is_ascii_alphanumeric() || "-_./:=,+".contains(c)) {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', "'\\''"))
    }
}

/// Command line with `--config` pointing at the snapshot. Overrides stay
/// in place; applying them to the snapshot is a no-op.
pub fn reproduce_args(args: &[String], snapshot: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--config" {
            out.push(a.clone());
            iter.next();
            out.push(snapshot.to_string());
        } else if a.starts_with("--config=") {
            out.push(format!("--config={snapshot}"));
        } else {
            out.push(a.clone());
        }
    }
    out
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let line = |args: &[String]| args.iter().map(|a| quote(a)).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "subcommand = {}", self.subcommand);
        let _ = writeln!(s, "command_line = {}", line(&self.command_line));
        let _ = writeln!(
            s,
            "reproduce = {}",
            line(&reproduce_args(&self.command_line, &self.config_snapshot))
        );
        let _ = writeln!(s, "config = {}", self.config_snapshot);
        for o in &self.outputs {
            let _ = writeln!(s, "output = {o}");
        }
        for g in &self.grids {
            let _ = writeln!(s, "grid = {g}");
        }
        let _ = writeln!(s, "wall_clock_s = {:.3}", self.wall_clock.as_secs_f64());
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_is_swapped_for_snapshot() {
        let args: Vec<String> = ["walkoff", "image", "--config", "a.cfg", "--alpha", "90"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let r = reproduce_args(&args, "out.config");
        assert_eq!(r[3], "out.config");
        assert_eq!(r[5], "90");
        let eq = reproduce_args(&["--config=a.cfg".to_string()], "b");
        assert_eq!(eq, vec!["--config=b".to_string()]);
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a b"), "'a b'");
        assert_eq!(quote("0:360:15"), "0:360:15");
    }
}
