use rand::Rng;

use super::{sample_negative, GenerationMode, KindChoice, Question, QuestionError, QuestionKind, Reference};
use crate::gateway::{ChatClient, GatewayError};
use crate::pkg::{Edge, Entity, EntityId, ParameterizedKG};
use crate::prompts::{PromptTemplate, WH_GENERATION, YES_NO_GENERATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriterKind {
    YesNo,
    Wh,
}

/// Surface labels for one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionSlots {
    pub subject: String,
    pub subject_alias: Option<String>,
    pub predicate: String,
    /// Presented object for Yes/No; the edge's own object for Wh.
    pub object: String,
}

pub trait QuestionWriter: Send + Sync {
    fn mode(&self) -> GenerationMode;
    fn write(&self, kind: WriterKind, slots: &QuestionSlots) -> Result<String, GatewayError>;
}

/// Deterministic surface forms.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateWriter;

impl QuestionWriter for TemplateWriter {
    fn mode(&self) -> GenerationMode {
        GenerationMode::Template
    }

    fn write(&self, kind: WriterKind, slots: &QuestionSlots) -> Result<String, GatewayError> {
        Ok(template_text(kind, slots))
    }
}

const PERSON_PREDICATES: &[&str] = &[
    "father",
    "mother",
    "spouse",
    "sibling",
    "child",
    "head of state",
    "head of government",
    "director",
    "author",
    "founded by",
    "founder",
    "creator",
    "composer",
    "screenwriter",
    "producer",
    "cast member",
    "performer",
    "student of",
    "doctoral advisor",
    "relative",
    "partner",
    "chairperson",
    "ceo",
    "owner",
];

fn asks_for_person(predicate: &str) -> bool {
    let p = predicate.to_lowercase();
    PERSON_PREDICATES.iter().any(|k| p == *k || p.starts_with(&format!("{k} ")))
}

fn alias_clause(alias: Option<&str>) -> String {
    match alias {
        Some(a) if !a.trim().is_empty() => format!(" (also known as {a})"),
        _ => String::new(),
    }
}

pub fn template_text(kind: WriterKind, slots: &QuestionSlots) -> String {
    let aka = alias_clause(slots.subject_alias.as_deref());
    match kind {
        WriterKind::YesNo => {
            let verb = if slots.object.contains(" and ") { "Are" } else { "Is" };
            format!("{verb} {} the {} of {}{aka}?", slots.object, slots.predicate, slots.subject)
        }
        WriterKind::Wh => {
            let wh = if asks_for_person(&slots.predicate) { "Who" } else { "What" };
            format!("{wh} is the {} of {}{aka}?", slots.predicate, slots.subject)
        }
    }
}

/// Few-shot generation through a chat client.
pub struct ChatQuestionWriter<C> {
    client: C,
    yes_no: PromptTemplate,
    wh: PromptTemplate,
}

impl<C: ChatClient> ChatQuestionWriter<C> {
    pub fn new(client: C) -> Self {
        Self {
            client,
            yes_no: PromptTemplate::parse(YES_NO_GENERATION),
            wh: PromptTemplate::parse(WH_GENERATION),
        }
    }
}

impl<C: ChatClient> QuestionWriter for ChatQuestionWriter<C> {
    fn mode(&self) -> GenerationMode {
        GenerationMode::Llm
    }

    fn write(&self, kind: WriterKind, slots: &QuestionSlots) -> Result<String, GatewayError> {
        let messages = match kind {
            WriterKind::YesNo => {
                let alias = slots
                    .subject_alias
                    .as_deref()
                    .map(|a| format!(", SUBJECT_ALIAS is {a}"))
                    .unwrap_or_default();
                self.yes_no.render(&[
                    ("subject", &slots.subject),
                    ("predicate", &slots.predicate),
                    ("object", &slots.object),
                    ("alias", &alias),
                ])
            }
            WriterKind::Wh => self.wh.render(&[
                ("subject", &slots.subject),
                ("predicate", &slots.predicate),
                ("object", &slots.object),
            ]),
        };
        let text = self.client.complete(&messages)?;
        let text = text.trim();
        if text.is_empty() {
            return Err(GatewayError::MalformedResponse("empty question".into()));
        }
        Ok(text.to_string())
    }
}

fn leaks(text: &str, gold_labels: &[String]) -> bool {
    let lower = text.to_lowercase();
    gold_labels
        .iter()
        .filter(|g| !g.trim().is_empty())
        .any(|g| lower.contains(&g.to_lowercase()))
}

fn label_of(pkg: &ParameterizedKG, reference: &Reference, id: &EntityId) -> Result<String, QuestionError> {
    reference
        .entity(pkg, id)
        .map(|e| e.label.clone())
        .ok_or_else(|| QuestionError::UnknownEntity(id.clone()))
}

fn subject_entity<'a>(pkg: &'a ParameterizedKG, edge: &Edge) -> Result<&'a Entity, QuestionError> {
    pkg.entity(&edge.subject)
        .ok_or_else(|| QuestionError::UnknownEntity(edge.subject.clone()))
}

/// Builds the exam item for `edge` with the chosen kind.
///
/// Wh text that names a gold object is regenerated once, then replaced by the
/// template form; if even the template names one, `GoldLeak` is returned.
pub fn render_question<R: Rng + ?Sized>(
    pkg: &ParameterizedKG,
    reference: &Reference,
    edge: &Edge,
    choice: KindChoice,
    writer: &dyn QuestionWriter,
    rng: &mut R,
) -> Result<Question, QuestionError> {
    let subject = subject_entity(pkg, edge)?;
    let predicate = pkg
        .predicate(&edge.predicate)
        .map(|p| p.label.clone())
        .unwrap_or_else(|| edge.predicate.to_string());
    let mut slots = QuestionSlots {
        subject: subject.label.clone(),
        subject_alias: subject.primary_alias().map(str::to_string),
        predicate,
        object: label_of(pkg, reference, &edge.object)?,
    };

    match choice {
        KindChoice::YesNo { expected_answer } => {
            let presented = if expected_answer {
                edge.object.clone()
            } else {
                sample_negative(edge, &reference.sets, rng)?
            };
            slots.object = label_of(pkg, reference, &presented)?;
            let text = writer.write(WriterKind::YesNo, &slots)?;
            Ok(Question {
                edge_id: edge.id.clone(),
                kind: QuestionKind::YesNo {
                    expected_answer,
                    presented_object: presented,
                },
                text,
                generation_mode: writer.mode(),
            })
        }
        KindChoice::Wh => {
            let gold_objects = reference.sets.truth(&edge.subject, &edge.predicate).clone();
            let mut gold_labels = Vec::new();
            let mut label_list = Vec::new();
            for id in &gold_objects {
                let entity = reference
                    .entity(pkg, id)
                    .ok_or_else(|| QuestionError::UnknownEntity(id.clone()))?;
                label_list.push(entity.label.clone());
                gold_labels.push(entity.label.clone());
                gold_labels.extend(entity.aliases.iter().cloned());
            }
            let mut accepted = None;
            if writer.mode() == GenerationMode::Llm {
                for attempt in 0..2 {
                    let text = writer.write(WriterKind::Wh, &slots)?;
                    if !leaks(&text, &label_list) {
                        accepted = Some((text, GenerationMode::Llm));
                        break;
                    }
                    log::debug!("edge {}: generated Wh question names a gold object (attempt {})", edge.id, attempt + 1);
                }
            }
            let (text, generation_mode) = match accepted {
                Some(found) => found,
                None => {
                    let text = template_text(WriterKind::Wh, &slots);
                    if leaks(&text, &label_list) {
                        return Err(QuestionError::GoldLeak(edge.id.clone()));
                    }
                    (text, GenerationMode::Template)
                }
            };
            Ok(Question {
                edge_id: edge.id.clone(),
                kind: QuestionKind::Wh {
                    gold_objects,
                    gold_labels_and_aliases: gold_labels,
                },
                text,
                generation_mode,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ScriptedChatClient;
    use crate::pkg::{init_pkg, EdgeSpec, GraphSource, PredicateDef};
    use crate::rng::seeded;

    fn slots(subject: &str, alias: Option<&str>, predicate: &str, object: &str) -> QuestionSlots {
        QuestionSlots {
            subject: subject.into(),
            subject_alias: alias.map(Into::into),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    fn emperor() -> ParameterizedKG {
        init_pkg(GraphSource {
            entities: vec![
                Entity::new("Q1", "Yellow Emperor"),
                Entity::new("Q2", "Shaodian"),
                Entity::new("Q3", "Fuxi"),
                Entity::new("Q4", "Emperor Yan"),
            ],
            predicates: vec![PredicateDef::new("P22", "father")],
            edges: vec![
                EdgeSpec::new("e1", "Q1", "P22", "Q2"),
                EdgeSpec::new("e2", "Q4", "P22", "Q3"),
            ],
        })
        .unwrap()
    }

    #[test]
    fn yes_no_template_matches_demonstration() {
        let s = slots("Jorund", Some("Jörundr"), "birth place", "Gamla Uppsala");
        assert_eq!(
            template_text(WriterKind::YesNo, &s),
            "Is Gamla Uppsala the birth place of Jorund (also known as Jörundr)?"
        );
    }

    #[test]
    fn wh_template_matches_demonstration() {
        let s = slots("Yellow Emperor", None, "father", "Shaodian");
        assert_eq!(template_text(WriterKind::Wh, &s), "Who is the father of Yellow Emperor?");
        let s = slots("Jorund", None, "place of birth", "Gamla Uppsala");
        assert_eq!(template_text(WriterKind::Wh, &s), "What is the place of birth of Jorund?");
    }

    #[test]
    fn template_is_deterministic() {
        let pkg = emperor();
        let reference = Reference::from_pkg(&pkg);
        let edge = pkg.edge(&"e1".into()).unwrap();
        let choice = KindChoice::YesNo { expected_answer: true };
        let a = render_question(&pkg, &reference, edge, choice, &TemplateWriter, &mut seeded(1)).unwrap();
        let b = render_question(&pkg, &reference, edge, choice, &TemplateWriter, &mut seeded(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.text, "Is Shaodian the father of Yellow Emperor?");
    }

    #[test]
    fn no_question_presents_a_negative() {
        let pkg = emperor();
        let reference = Reference::from_pkg(&pkg);
        let edge = pkg.edge(&"e1".into()).unwrap();
        let q = render_question(
            &pkg,
            &reference,
            edge,
            KindChoice::YesNo { expected_answer: false },
            &TemplateWriter,
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(
            q.kind,
            QuestionKind::YesNo {
                expected_answer: false,
                presented_object: "Q3".into()
            }
        );
        assert_eq!(q.text, "Is Fuxi the father of Yellow Emperor?");
    }

    #[test]
    fn wh_gold_set_is_the_truth_set() {
        let pkg = emperor();
        let reference = Reference::from_pkg(&pkg);
        let edge = pkg.edge(&"e1".into()).unwrap();
        let q = render_question(&pkg, &reference, edge, KindChoice::Wh, &TemplateWriter, &mut seeded(1)).unwrap();
        match q.kind {
            QuestionKind::Wh {
                gold_objects,
                gold_labels_and_aliases,
            } => {
                assert_eq!(gold_objects.into_iter().collect::<Vec<_>>(), vec![EntityId::from("Q2")]);
                assert_eq!(gold_labels_and_aliases, vec!["Shaodian".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn llm_prompt_carries_alias_slot() {
        let client = ScriptedChatClient::new(["Is Gamla Uppsala the birth place of Jorund (also known as Jörundr)?"]);
        let writer = ChatQuestionWriter::new(client.clone());
        let s = slots("Jorund", Some("Jörundr"), "place of birth", "Gamla Uppsala");
        let text = writer.write(WriterKind::YesNo, &s).unwrap();
        assert_eq!(text, "Is Gamla Uppsala the birth place of Jorund (also known as Jörundr)?");
        let sent = client.requests();
        assert_eq!(
            sent[0].last().unwrap().content,
            "SUBJECT is Jorund, PREDICT is place of birth, OBJECT is Gamla Uppsala, SUBJECT_ALIAS is Jörundr"
        );
    }

    #[test]
    fn leaking_generation_is_retried_then_replaced() {
        let pkg = emperor();
        let reference = Reference::from_pkg(&pkg);
        let edge = pkg.edge(&"e1".into()).unwrap();

        let client = ScriptedChatClient::new(["Is shaodian his father?", "Who fathered the Yellow Emperor?"]);
        let writer = ChatQuestionWriter::new(client.clone());
        let q = render_question(&pkg, &reference, edge, KindChoice::Wh, &writer, &mut seeded(1)).unwrap();
        assert_eq!(q.text, "Who fathered the Yellow Emperor?");
        assert_eq!(q.generation_mode, GenerationMode::Llm);

        let client = ScriptedChatClient::new(["Shaodian?", "Was it Shaodian?"]);
        let writer = ChatQuestionWriter::new(client.clone());
        let q = render_question(&pkg, &reference, edge, KindChoice::Wh, &writer, &mut seeded(1)).unwrap();
        assert_eq!(q.text, "Who is the father of Yellow Emperor?");
        assert_eq!(q.generation_mode, GenerationMode::Template);
        assert_eq!(client.requests().len(), 2);
    }

    #[test]
    fn template_leak_is_reported() {
        let pkg = init_pkg(GraphSource {
            entities: vec![Entity::new("A", "Paris Hilton"), Entity::new("B", "Paris")],
            predicates: vec![PredicateDef::new("p", "named after")],
            edges: vec![EdgeSpec::new("e", "A", "p", "B")],
        })
        .unwrap();
        let reference = Reference::from_pkg(&pkg);
        let edge = pkg.edge(&"e".into()).unwrap();
        let err = render_question(&pkg, &reference, edge, KindChoice::Wh, &TemplateWriter, &mut seeded(1)).unwrap_err();
        assert_eq!(err, QuestionError::GoldLeak("e".into()));
    }

    #[test]
    fn writer_failure_is_generation_unavailable() {
        let pkg = emperor();
        let reference = Reference::from_pkg(&pkg);
        let edge = pkg.edge(&"e1".into()).unwrap();
        let client = ScriptedChatClient::failing(GatewayError::Unavailable {
            attempts: 3,
            last_error: "down".into(),
            retry_after: None,
        });
        let writer = ChatQuestionWriter::new(client);
        let err = render_question(
            &pkg,
            &reference,
            edge,
            KindChoice::YesNo { expected_answer: true },
            &writer,
            &mut seeded(1),
        )
        .unwrap_err();
        assert!(matches!(err, QuestionError::GenerationUnavailable(_)));
    }
}
