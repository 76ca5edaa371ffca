//! Revisers backed by a child process: the (optionally intent-prefixed)
//! document goes to standard input and the revision is read from standard
//! output.

use std::io::Write;
use std::process::{Command, Stdio};

use super::{condition_input, ReviseError, Reviser, DEFAULT_INTENT_TEMPLATE};
use crate::corpus::EditIntention;

#[derive(Debug, Clone)]
pub struct ExecReviser {
    /// Run through `sh -c`.
    pub command: String,
    pub template: String,
    /// Exported to the child as `REVKIT_DEPTH` when set.
    pub pass_depth: bool,
    name: String,
}

impl ExecReviser {
    pub fn new(command: &str, template: Option<&str>) -> Result<Self, ReviseError> {
        let template = template.unwrap_or(DEFAULT_INTENT_TEMPLATE).to_string();
        super::check_template(&template)?;
        if command.trim().is_empty() {
            return Err(ReviseError::InvalidRuleConfig("empty reviser command".into()));
        }
        Ok(ExecReviser {
            command: command.to_string(),
            template,
            pass_depth: true,
            name: format!("exec:{command}"),
        })
    }
}

impl Reviser for ExecReviser {
    fn name(&self) -> &str {
        &self.name
    }

    fn revise(&self, document: &str, conditioning: Option<&[EditIntention]>, depth: u32) -> Result<String, ReviseError> {
        let input = condition_input(document, conditioning.unwrap_or(&[]), &self.template)?;
        let mut cmd = Command::new("sh");
        cmd.arg("-c").arg(&self.command);
        if self.pass_depth {
            cmd.env("REVKIT_DEPTH", depth.to_string());
        }
        let mut child = cmd
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| ReviseError::ReviserFailure(format!("spawn {:?}: {e}", self.command)))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        // write from a thread so a child that streams output early cannot deadlock us
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let out = child
            .wait_with_output()
            .map_err(|e| ReviseError::ReviserFailure(e.to_string()))?;
        let _ = writer.join();
        if !out.status.success() {
            let err = String::from_utf8_lossy(&out.stderr);
            return Err(ReviseError::ReviserFailure(format!("{} exited with {}: {}", self.command, out.status, err.trim())));
        }
        let text = String::from_utf8(out.stdout).map_err(|_| ReviseError::ReviserFailure("output is not UTF-8".into()))?;
        Ok(text.strip_suffix('\n').unwrap_or(&text).to_string())
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    #[test]
    fn cat_is_identity() {
        let r = ExecReviser::new("cat", None).unwrap();
        assert_eq!(r.revise("Some text.", None, 1).unwrap(), "Some text.");
        assert_eq!(r.revise("Some text.", Some(&[EditIntention::Clarity]), 1).unwrap(), "<clarity> Some text.");
    }

    #[test]
    fn failure_is_reported() {
        let r = ExecReviser::new("exit 3", None).unwrap();
        assert!(matches!(r.revise("x", None, 1), Err(ReviseError::ReviserFailure(_))));
    }
}
