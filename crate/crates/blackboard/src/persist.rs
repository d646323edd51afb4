//! Plaintext persistence: initial network saves, per-link change files,
//! and loading both back.
//!
//! Every file is UTF-8 with LF line endings (final line terminated) and
//! every line follows `type,action,value,...`. Tokens never contain commas
//! or newlines; booleans serialize as `True`/`False`. The save grammar:
//!
//! ```text
//! setting,<name>,<value>
//! commonproperty,addition,<id>,<description>
//! fact,addition,<id>,<property>,<True|False>
//! container,addition,<id>,<description>
//! attach,addition,<container>,<fact>
//! link,addition,<id>,<origin>,<destination>,<description>
//! genericrule,addition,<id>,<title>,<create>,<ignore>,<list>,<list>,<list>,<list>
//! start container,addition,<id>
//! end container,addition,<id>
//! shortest path,addition,<id.id.id>
//! ```
//!
//! Generic-rule condition lists are period-separated `property-Boolean`
//! pairs (`2-True.5-False`), one comma field per list in the order before
//! one, before two, after one, after two; an empty list is an empty field.
//! Change files identify the link being traversed, the rules that ran, and
//! their fact changes:
//!
//! ```text
//! link,traverse,<link>
//! genericrule,run,<rule>
//! fact,addition,<id>,<property>,<True|False>,<container>
//! fact,change,<id>,<True|False>
//! ```
//!
//! Sections appear in the fixed order above and entities in id order, so
//! identical networks serialize byte-identically. Networks holding plain
//! facts, basic rules, or action stubs have no line form and are rejected.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{ChangeRecord, RuleRef};
use crate::model::{
    CommonProperty, CommonPropertyId, ConditionPair, Container, ContainerId, Fact, FactBinding,
    FactId, GenericRule, GenericRuleId, Link, LinkId,
};
use crate::netgen::GenerationParams;
use crate::network::{ModelError, Network};
use crate::traversal::TraversalStep;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error("cannot serialize {0}")]
    Unsupported(String),
    #[error("token {0:?} contains a separator character")]
    InvalidToken(String),
}

/// A file written to disk and its size in bytes.
#[derive(Debug, Clone)]
pub struct SavedFile {
    pub path: PathBuf,
    pub bytes: u64,
}

/// A parsed save file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedNetwork {
    pub params: GenerationParams,
    pub network: Network,
}

fn bool_token(value: bool) -> &'static str {
    if value {
        "True"
    } else {
        "False"
    }
}

fn check_token(token: &str) -> Result<&str, PersistError> {
    if token.contains(',') || token.contains('\n') || token.contains('\r') {
        return Err(PersistError::InvalidToken(token.to_string()));
    }
    Ok(token)
}

fn pair_list(pairs: &[ConditionPair]) -> String {
    pairs
        .iter()
        .map(|pair| format!("{}-{}", pair.property, bool_token(pair.value)))
        .collect::<Vec<_>>()
        .join(".")
}

/// Serialize a network and its generation settings to the save format.
pub fn save_to_string(
    params: &GenerationParams,
    network: &Network,
) -> Result<String, PersistError> {
    if network.basic_rule_count() > 0 {
        return Err(PersistError::Unsupported("basic rules".into()));
    }
    if network.action_count() > 0 {
        return Err(PersistError::Unsupported("action stubs".into()));
    }
    let mut out = String::new();
    for (key, value) in params.settings() {
        out.push_str(&format!("setting,{key},{value}\n"));
    }
    for property in network.common_properties() {
        out.push_str(&format!(
            "commonproperty,addition,{},{}\n",
            property.id,
            check_token(&property.description)?
        ));
    }
    for fact in network.facts() {
        let property = match &fact.binding {
            FactBinding::Property(property) => property,
            FactBinding::Description(_) => {
                return Err(PersistError::Unsupported(format!("plain fact {}", fact.id)))
            }
        };
        out.push_str(&format!(
            "fact,addition,{},{},{}\n",
            fact.id,
            property,
            bool_token(fact.value)
        ));
    }
    for container in network.containers() {
        out.push_str(&format!(
            "container,addition,{},{}\n",
            container.id,
            check_token(&container.description)?
        ));
    }
    for container in network.containers() {
        for fact in container.facts() {
            out.push_str(&format!("attach,addition,{},{}\n", container.id, fact));
        }
    }
    for link in network.links() {
        out.push_str(&format!(
            "link,addition,{},{},{},{}\n",
            link.id,
            link.origin,
            link.destination,
            check_token(&link.description)?
        ));
    }
    for rule in network.generic_rules() {
        out.push_str(&format!(
            "genericrule,addition,{},{},{},{},{},{},{},{}\n",
            rule.id,
            check_token(&rule.title)?,
            bool_token(rule.create_if_not_present),
            bool_token(rule.ignore_if_not_present),
            pair_list(&rule.before_one),
            pair_list(&rule.before_two),
            pair_list(&rule.after_one),
            pair_list(&rule.after_two),
        ));
    }
    if let Some(start) = network.start() {
        out.push_str(&format!("start container,addition,{start}\n"));
    }
    if let Some(end) = network.end() {
        out.push_str(&format!("end container,addition,{end}\n"));
    }
    if let Some(path) = network.shortest_path() {
        let ids: Vec<String> = path.iter().map(|link| link.to_string()).collect();
        out.push_str(&format!("shortest path,addition,{}\n", ids.join(".")));
    }
    Ok(out)
}

/// Write the initial network save to `<dir>/saves/<test_id>.txt`.
pub fn save_initial(
    params: &GenerationParams,
    network: &Network,
    dir: &Path,
    test_id: u32,
) -> Result<SavedFile, PersistError> {
    let text = save_to_string(params, network)?;
    let folder = dir.join("saves");
    fs::create_dir_all(&folder).map_err(|source| PersistError::Io {
        path: folder.clone(),
        source,
    })?;
    let path = folder.join(format!("{test_id}.txt"));
    fs::write(&path, text.as_bytes()).map_err(|source| PersistError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(SavedFile {
        path,
        bytes: text.len() as u64,
    })
}

struct LineParser<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

impl<'a> LineParser<'a> {
    fn expect_fields(&self, count: usize) -> Result<(), PersistError> {
        if self.fields.len() != count {
            return Err(PersistError::Syntax {
                line: self.line,
                message: format!("expected {count} fields, got {}", self.fields.len()),
            });
        }
        Ok(())
    }

    fn expect_action(&self, action: &str) -> Result<(), PersistError> {
        if self.fields.get(1) != Some(&action) {
            return Err(PersistError::Syntax {
                line: self.line,
                message: format!(
                    "expected action {action:?}, got {:?}",
                    self.fields.get(1).copied().unwrap_or("")
                ),
            });
        }
        Ok(())
    }

    fn id(&self, field: usize) -> Result<u32, PersistError> {
        self.fields[field]
            .parse::<u32>()
            .map_err(|_| PersistError::Syntax {
                line: self.line,
                message: format!("expected an id, got {:?}", self.fields[field]),
            })
    }

    fn boolean(&self, field: usize) -> Result<bool, PersistError> {
        parse_bool(self.fields[field], self.line)
    }
}

fn parse_bool(token: &str, line: usize) -> Result<bool, PersistError> {
    match token {
        "True" => Ok(true),
        "False" => Ok(false),
        other => Err(PersistError::Syntax {
            line,
            message: format!("expected True or False, got {other:?}"),
        }),
    }
}

fn parse_pair_list(
    field: &str,
    line: usize,
) -> Result<Vec<ConditionPair>, PersistError> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split('.')
        .map(|pair| {
            let (property, value) = pair.split_once('-').ok_or_else(|| PersistError::Syntax {
                line,
                message: format!("expected property-Boolean pair, got {pair:?}"),
            })?;
            let property = property.parse::<u32>().map_err(|_| PersistError::Syntax {
                line,
                message: format!("expected a property id, got {property:?}"),
            })?;
            Ok(ConditionPair::new(
                CommonPropertyId(property),
                parse_bool(value, line)?,
            ))
        })
        .collect()
}

/// Parse the save format back into a network and its settings.
pub fn parse_network(text: &str) -> Result<LoadedNetwork, PersistError> {
    let mut params = GenerationParams::default();
    let mut network = Network::new();
    let mut start: Option<ContainerId> = None;
    let mut end: Option<ContainerId> = None;
    let mut shortest_path: Option<Vec<LinkId>> = None;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let parser = LineParser {
            line,
            fields: raw.split(',').collect(),
        };
        let model = |source: ModelError| PersistError::Model { line, source };
        match parser.fields[0] {
            "setting" => {
                parser.expect_fields(3)?;
                params
                    .set_setting(parser.fields[1], parser.fields[2])
                    .map_err(|message| PersistError::Syntax { line, message })?;
            }
            "commonproperty" => {
                parser.expect_fields(4)?;
                parser.expect_action("addition")?;
                network
                    .insert_common_property(CommonProperty::new(
                        CommonPropertyId(parser.id(2)?),
                        parser.fields[3],
                    ))
                    .map_err(model)?;
            }
            "fact" => {
                parser.expect_fields(5)?;
                parser.expect_action("addition")?;
                network
                    .insert_fact(Fact::instance(
                        FactId(parser.id(2)?),
                        CommonPropertyId(parser.id(3)?),
                        parser.boolean(4)?,
                    ))
                    .map_err(model)?;
            }
            "container" => {
                parser.expect_fields(4)?;
                parser.expect_action("addition")?;
                network
                    .insert_container(Container::new(ContainerId(parser.id(2)?), parser.fields[3]))
                    .map_err(model)?;
            }
            "attach" => {
                parser.expect_fields(4)?;
                parser.expect_action("addition")?;
                network
                    .attach_fact(ContainerId(parser.id(2)?), FactId(parser.id(3)?))
                    .map_err(model)?;
            }
            "link" => {
                parser.expect_fields(6)?;
                parser.expect_action("addition")?;
                network
                    .insert_link(Link::new(
                        LinkId(parser.id(2)?),
                        ContainerId(parser.id(3)?),
                        ContainerId(parser.id(4)?),
                        parser.fields[5],
                    ))
                    .map_err(model)?;
            }
            "genericrule" => {
                parser.expect_fields(10)?;
                parser.expect_action("addition")?;
                network
                    .insert_generic_rule(GenericRule {
                        id: GenericRuleId(parser.id(2)?),
                        title: parser.fields[3].to_string(),
                        create_if_not_present: parser.boolean(4)?,
                        ignore_if_not_present: parser.boolean(5)?,
                        before_one: parse_pair_list(parser.fields[6], line)?,
                        before_two: parse_pair_list(parser.fields[7], line)?,
                        after_one: parse_pair_list(parser.fields[8], line)?,
                        after_two: parse_pair_list(parser.fields[9], line)?,
                    })
                    .map_err(model)?;
            }
            "start container" => {
                parser.expect_fields(3)?;
                parser.expect_action("addition")?;
                start = Some(ContainerId(parser.id(2)?));
            }
            "end container" => {
                parser.expect_fields(3)?;
                parser.expect_action("addition")?;
                end = Some(ContainerId(parser.id(2)?));
            }
            "shortest path" => {
                parser.expect_fields(3)?;
                parser.expect_action("addition")?;
                let ids = parser.fields[2]
                    .split('.')
                    .map(|token| {
                        token.parse::<u32>().map(LinkId).map_err(|_| {
                            PersistError::Syntax {
                                line,
                                message: format!("expected a link id, got {token:?}"),
                            }
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                shortest_path = Some(ids);
            }
            other => {
                return Err(PersistError::Syntax {
                    line,
                    message: format!("unknown line type {other:?}"),
                })
            }
        }
    }

    match (start, end) {
        (Some(start), Some(end)) => {
            network
                .set_endpoints(start, end)
                .map_err(|source| PersistError::Model { line: 0, source })?;
        }
        (None, None) => {}
        _ => {
            return Err(PersistError::Syntax {
                line: 0,
                message: "start and end containers must both be present or both absent".into(),
            })
        }
    }
    if let Some(path) = shortest_path {
        network
            .set_shortest_path(path)
            .map_err(|source| PersistError::Model { line: 0, source })?;
    }
    Ok(LoadedNetwork { params, network })
}

/// Load a save file from disk.
pub fn load_network(path: &Path) -> Result<LoadedNetwork, PersistError> {
    let text = fs::read_to_string(path).map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_network(&text)
}

/// Serialize one traversal step to the change-file format.
pub fn change_file_to_string(step: &TraversalStep) -> String {
    let mut out = format!("link,traverse,{}\n", step.link);
    for set in &step.applied {
        match set.rule {
            RuleRef::Generic(rule) => out.push_str(&format!("genericrule,run,{rule}\n")),
            RuleRef::Basic(rule) => out.push_str(&format!("basicrule,run,{rule}\n")),
        }
        for record in &set.records {
            match record {
                ChangeRecord::FactAdded {
                    container,
                    fact,
                    property,
                    value,
                } => out.push_str(&format!(
                    "fact,addition,{fact},{property},{},{container}\n",
                    bool_token(*value)
                )),
                ChangeRecord::FactChanged {
                    fact, new_value, ..
                } => out.push_str(&format!("fact,change,{fact},{}\n", bool_token(*new_value))),
            }
        }
    }
    out
}

/// Write one step's change file to `<dir>/changes/<test_id>-<index>.txt`.
pub fn write_change_file(
    dir: &Path,
    test_id: u32,
    step: &TraversalStep,
) -> Result<SavedFile, PersistError> {
    let text = change_file_to_string(step);
    let folder = dir.join("changes");
    fs::create_dir_all(&folder).map_err(|source| PersistError::Io {
        path: folder.clone(),
        source,
    })?;
    let path = folder.join(format!("{test_id}-{}.txt", step.index));
    fs::write(&path, text.as_bytes()).map_err(|source| PersistError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(SavedFile {
        path,
        bytes: text.len() as u64,
    })
}

/// One entry of a parsed change file, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChangeEntry {
    RuleRun(RuleRef),
    FactAdded {
        fact: FactId,
        property: CommonPropertyId,
        value: bool,
        container: ContainerId,
    },
    FactChanged {
        fact: FactId,
        value: bool,
    },
}

/// A parsed change file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeFile {
    pub link: LinkId,
    pub entries: Vec<ChangeEntry>,
}

/// Parse the change-file format.
pub fn parse_change_file(text: &str) -> Result<ChangeFile, PersistError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(PersistError::Syntax {
        line: 1,
        message: "empty change file".into(),
    })?;
    let header_fields: Vec<&str> = header.split(',').collect();
    if header_fields.len() != 3 || header_fields[0] != "link" || header_fields[1] != "traverse" {
        return Err(PersistError::Syntax {
            line: 1,
            message: "change files must start with a link,traverse line".into(),
        });
    }
    let link = header_fields[2]
        .parse::<u32>()
        .map(LinkId)
        .map_err(|_| PersistError::Syntax {
            line: 1,
            message: format!("expected a link id, got {:?}", header_fields[2]),
        })?;

    let mut entries = Vec::new();
    for (index, raw) in lines {
        let line = index + 1;
        let parser = LineParser {
            line,
            fields: raw.split(',').collect(),
        };
        match (parser.fields[0], parser.fields.get(1).copied()) {
            ("genericrule", Some("run")) => {
                parser.expect_fields(3)?;
                entries.push(ChangeEntry::RuleRun(RuleRef::Generic(GenericRuleId(
                    parser.id(2)?,
                ))));
            }
            ("basicrule", Some("run")) => {
                parser.expect_fields(3)?;
                entries.push(ChangeEntry::RuleRun(RuleRef::Basic(
                    crate::model::BasicRuleId(parser.id(2)?),
                )));
            }
            ("fact", Some("addition")) => {
                parser.expect_fields(6)?;
                entries.push(ChangeEntry::FactAdded {
                    fact: FactId(parser.id(2)?),
                    property: CommonPropertyId(parser.id(3)?),
                    value: parser.boolean(4)?,
                    container: ContainerId(parser.id(5)?),
                });
            }
            ("fact", Some("change")) => {
                parser.expect_fields(4)?;
                entries.push(ChangeEntry::FactChanged {
                    fact: FactId(parser.id(2)?),
                    value: parser.boolean(3)?,
                });
            }
            (other, action) => {
                return Err(PersistError::Syntax {
                    line,
                    message: format!(
                        "unknown change line {other:?} with action {:?}",
                        action.unwrap_or("")
                    ),
                })
            }
        }
    }
    Ok(ChangeFile { link, entries })
}

/// Load a change file from disk.
pub fn load_change_file(path: &Path) -> Result<ChangeFile, PersistError> {
    let text = fs::read_to_string(path).map_err(|source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_change_file(&text)
}

/// Apply a change file's fact additions and changes to a network, in file
/// order. Rule-run entries are informational and skipped.
pub fn apply_change_file(network: &mut Network, file: &ChangeFile) -> Result<(), ModelError> {
    for entry in &file.entries {
        match entry {
            ChangeEntry::RuleRun(_) => {}
            ChangeEntry::FactAdded {
                fact,
                property,
                value,
                container,
            } => {
                network.insert_fact(Fact::instance(*fact, *property, *value))?;
                network.attach_fact(*container, *fact)?;
            }
            ChangeEntry::FactChanged { fact, value } => {
                network.set_fact_value(*fact, *value)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fact_line_follows_the_grammar() {
        let mut net = Network::new();
        for i in 0..8 {
            net.add_common_property(format!("cp{i}")).unwrap();
        }
        let fact = net.add_instance_fact(CommonPropertyId(7), true).unwrap();
        assert_eq!(fact, FactId(0));
        // Put the id where the example wants it.
        net.add_instance_fact(CommonPropertyId(0), false).unwrap();
        net.add_instance_fact(CommonPropertyId(1), false).unwrap();
        net.insert_fact(Fact::instance(FactId(3), CommonPropertyId(7), true))
            .unwrap();
        let text = save_to_string(&GenerationParams::default(), &net).unwrap();
        assert!(text.contains("fact,addition,3,7,True\n"));
    }

    #[test]
    fn generic_rule_line_encodes_flags_and_lists() {
        let mut net = Network::new();
        for i in 0..3 {
            net.add_common_property(format!("cp{i}")).unwrap();
        }
        net.insert_generic_rule(GenericRule {
            id: GenericRuleId(0),
            title: "gr0".into(),
            before_one: vec![ConditionPair::new(CommonPropertyId(2), true)],
            before_two: vec![],
            after_one: vec![],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: true,
        })
        .unwrap();
        let text = save_to_string(&GenerationParams::default(), &net).unwrap();
        assert!(text.contains("genericrule,addition,0,gr0,True,False,2-True,,,\n"));
    }

    #[test]
    fn settings_only_file_loads_to_an_empty_network() {
        let mut text = String::new();
        for (key, value) in GenerationParams::default().settings() {
            text.push_str(&format!("setting,{key},{value}\n"));
        }
        let loaded = parse_network(&text).unwrap();
        assert_eq!(loaded.params, GenerationParams::default());
        assert_eq!(loaded.network, Network::new());
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let text = "setting,fact_count,100\nfact,addition,0,oops,True\n";
        match parse_network(text) {
            Err(PersistError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_references_are_rejected_with_line_context() {
        let text = "fact,addition,0,9,True\n";
        match parse_network(text) {
            Err(PersistError::Model { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected a model error, got {other:?}"),
        }
    }

    #[test]
    fn descriptions_with_commas_cannot_be_saved() {
        let mut net = Network::new();
        net.add_common_property("a,b").unwrap();
        assert!(matches!(
            save_to_string(&GenerationParams::default(), &net),
            Err(PersistError::InvalidToken(_))
        ));
    }

    #[test]
    fn plain_facts_have_no_line_form() {
        let mut net = Network::new();
        net.add_plain_fact("standalone", true).unwrap();
        assert!(matches!(
            save_to_string(&GenerationParams::default(), &net),
            Err(PersistError::Unsupported(_))
        ));
    }

    #[test]
    fn true_is_one_byte_shorter_than_false() {
        assert_eq!(bool_token(true).len() + 1, bool_token(false).len());
    }

    #[test]
    fn change_file_round_trips() {
        use crate::engine::ChangeSet;
        let step = TraversalStep {
            index: 2,
            link: LinkId(9),
            applied: vec![ChangeSet {
                rule: RuleRef::Generic(GenericRuleId(4)),
                records: vec![
                    ChangeRecord::FactAdded {
                        container: ContainerId(1),
                        fact: FactId(12),
                        property: CommonPropertyId(7),
                        value: true,
                    },
                    ChangeRecord::FactChanged {
                        container: Some(ContainerId(0)),
                        fact: FactId(3),
                        property: Some(CommonPropertyId(2)),
                        new_value: false,
                    },
                ],
            }],
        };
        let text = change_file_to_string(&step);
        assert_eq!(
            text,
            "link,traverse,9\ngenericrule,run,4\nfact,addition,12,7,True,1\nfact,change,3,False\n"
        );
        let parsed = parse_change_file(&text).unwrap();
        assert_eq!(parsed.link, LinkId(9));
        assert_eq!(parsed.entries.len(), 3);
    }

    #[test]
    fn change_file_without_rules_only_has_the_link_line() {
        let step = TraversalStep {
            index: 0,
            link: LinkId(5),
            applied: vec![],
        };
        assert_eq!(change_file_to_string(&step), "link,traverse,5\n");
    }
}
