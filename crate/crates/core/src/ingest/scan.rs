// SPDX-License-Identifier: Apache-2.0

//! Line-level detection of top-level publication elements.
//!
//! Any element opened directly under the document root (`<dblp>`) counts as
//! an entry. Inside an entry only its own closing tag matters; nested tags
//! with the same name are balanced.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum TagEvent {
    /// An entry's opening `<` sits at this byte offset of the line.
    Start(usize),
    /// An entry's closing tag ends just before this byte offset.
    End(usize),
}

#[derive(Clone, Debug, Default)]
pub(crate) struct EntryScanner {
    open: Option<(Vec<u8>, usize)>,
}

const ROOT: &[u8] = b"dblp";

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b':' | b'.')
}

fn read_name(line: &[u8], from: usize) -> &[u8] {
    let end = line[from..]
        .iter()
        .position(|&b| !is_name_byte(b))
        .map_or(line.len(), |p| from + p);
    &line[from..end]
}

fn find_byte(line: &[u8], from: usize, byte: u8) -> Option<usize> {
    line[from..].iter().position(|&b| b == byte).map(|p| from + p)
}

impl EntryScanner {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// True while an entry has been opened and not yet closed.
    pub(crate) fn inside(&self) -> bool {
        self.open.is_some()
    }

    /// Scans one line (including its trailing newline, if any) and reports
    /// entry boundaries in order.
    pub(crate) fn scan_line(&mut self, line: &[u8], events: &mut Vec<TagEvent>) {
        let mut i = 0;
        while let Some(lt) = find_byte(line, i, b'<') {
            i = lt + 1;
            let Some(&next) = line.get(lt + 1) else {
                break;
            };
            match &mut self.open {
                None => {
                    if matches!(next, b'?' | b'!' | b'/') {
                        continue;
                    }
                    let name = read_name(line, lt + 1);
                    if name.is_empty() || name == ROOT {
                        continue;
                    }
                    let gt = find_byte(line, lt, b'>');
                    events.push(TagEvent::Start(lt));
                    match gt {
                        Some(gt) if line[gt - 1] == b'/' => {
                            events.push(TagEvent::End(gt + 1));
                            i = gt + 1;
                        }
                        _ => self.open = Some((name.to_vec(), 1)),
                    }
                }
                Some((name, depth)) => {
                    if next == b'/' {
                        if read_name(line, lt + 2) != name.as_slice() {
                            continue;
                        }
                        *depth -= 1;
                        if *depth == 0 {
                            let end = find_byte(line, lt, b'>').map_or(line.len(), |gt| gt + 1);
                            events.push(TagEvent::End(end));
                            self.open = None;
                            i = end;
                        }
                    } else if read_name(line, lt + 1) == name.as_slice() {
                        let self_closing = find_byte(line, lt, b'>').is_some_and(|gt| line[gt - 1] == b'/');
                        if !self_closing {
                            *depth += 1;
                        }
                    }
                }
            }
        }
    }
}
