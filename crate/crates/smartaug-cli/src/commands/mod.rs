pub mod analyze;
pub mod augment;
pub mod preview;
pub mod search;
pub mod synth;

use crate::CliError;

pub(crate) fn parse_size(s: &str) -> Result<(u32, u32), CliError> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() == 2 {
        if let (Ok(w), Ok(h)) = (parts[0].parse(), parts[1].parse()) {
            return Ok((w, h));
        }
    }
    Err(CliError::config(format!(
        "size must look like 256x256, got `{s}`"
    )))
}
