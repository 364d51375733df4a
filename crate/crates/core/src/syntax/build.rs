use crate::structure::{free_identifier, Kind, Vocabulary};

use super::{parse_body, parse_guard, Guard, Program, Script, SyntaxError};

/// Incremental construction of a script from statement snippets, with
/// fresh-name allocation against the growing vocabulary.
#[derive(Debug, Clone)]
pub struct ProgramBuilder {
    vocab: Vocabulary,
    temp: Option<String>,
    body: Vec<Program>,
}

impl ProgramBuilder {
    pub fn new(vocab: Vocabulary) -> Self {
        ProgramBuilder { vocab, temp: None, body: Vec::new() }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Declares a new function identifier named after `hint`.
    pub fn fresh_fn(&mut self, hint: &str, arity: usize) -> String {
        let name = free_identifier(&self.vocab, hint);
        self.vocab.add_function(&name, arity).expect("fresh name");
        name
    }

    pub fn fresh_rel(&mut self, hint: &str, arity: usize) -> String {
        let name = free_identifier(&self.vocab, hint);
        self.vocab.add_relation(&name, arity).expect("fresh name");
        name
    }

    /// Declares `name` unless already present with the same signature.
    pub fn ensure(&mut self, name: &str, kind: Kind, arity: usize) -> Result<(), SyntaxError> {
        self.vocab.ensure(name, kind, arity).map(|_| ()).map_err(|e| SyntaxError::Vocabulary(e.to_string()))
    }

    pub fn parse(&mut self, text: &str) -> Result<Vec<Program>, SyntaxError> {
        parse_body(text, &mut self.vocab, &mut self.temp)
    }

    pub fn guard(&self, text: &str) -> Result<Guard, SyntaxError> {
        parse_guard(text, &self.vocab)
    }

    /// Appends the statements in `text`.
    pub fn push(&mut self, text: &str) -> Result<(), SyntaxError> {
        let ps = self.parse(text)?;
        self.body.extend(ps);
        Ok(())
    }

    pub fn push_program(&mut self, p: Program) {
        self.body.push(p);
    }

    /// Number of top-level statements appended so far.
    pub fn statement_count(&self) -> usize {
        self.body.len()
    }

    /// Removes and returns the statements appended after the first `at`.
    pub fn take_from(&mut self, at: usize) -> Vec<Program> {
        self.body.split_off(at)
    }

    /// Runs `f` and returns the statements it pushed, without appending them.
    pub fn block<F>(&mut self, f: F) -> Result<Vec<Program>, SyntaxError>
    where
        F: FnOnce(&mut Self) -> Result<(), SyntaxError>,
    {
        let saved = std::mem::take(&mut self.body);
        let res = f(self);
        let inner = std::mem::replace(&mut self.body, saved);
        res.map(|_| inner)
    }

    /// Appends `do [guard] [variant] { body }`.
    pub fn do_variant<F>(&mut self, guard: &str, variant: &[&str], f: F) -> Result<(), SyntaxError>
    where
        F: FnOnce(&mut Self) -> Result<(), SyntaxError>,
    {
        let guard = self.guard(guard)?;
        for v in variant {
            match self.vocab.get(v) {
                Some(s) if s.arity > 0 => {}
                Some(_) => return Err(SyntaxError::NullaryVariant { line: 0, col: 0, name: v.to_string() }),
                None => return Err(SyntaxError::UnknownIdentifier { line: 0, col: 0, name: v.to_string() }),
            }
        }
        let body = self.block(f)?;
        self.body.push(Program::DoVariant { guard, variant: variant.iter().map(|s| s.to_string()).collect(), body });
        Ok(())
    }

    /// Appends `do [guard] { body }`.
    pub fn do_plain<F>(&mut self, guard: &str, f: F) -> Result<(), SyntaxError>
    where
        F: FnOnce(&mut Self) -> Result<(), SyntaxError>,
    {
        let guard = self.guard(guard)?;
        let body = self.block(f)?;
        self.body.push(Program::Do { guard, body });
        Ok(())
    }

    /// Appends `if [guard] { then } { else }`.
    pub fn if_else<F, G>(&mut self, guard: &str, then: F, els: G) -> Result<(), SyntaxError>
    where
        F: FnOnce(&mut Self) -> Result<(), SyntaxError>,
        G: FnOnce(&mut Self) -> Result<(), SyntaxError>,
    {
        let guard = self.guard(guard)?;
        let then = self.block(then)?;
        let els = self.block(els)?;
        self.body.push(Program::If { guard, then, els });
        Ok(())
    }

    pub fn build(self) -> Script {
        Script { vocab: self.vocab, body: self.body }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_construction() {
        let v = Vocabulary::functional([("e", 0), ("0", 1)]).unwrap();
        let mut b = ProgramBuilder::new(v);
        let a = b.fresh_fn("a", 0);
        b.push(&format!("{a} <- e")).unwrap();
        b.do_variant(&format!("def 0({a})"), &["0"], |b| b.push(&format!("{a} := 0({a})"))).unwrap();
        let s = b.build();
        assert_eq!(s.body.len(), 2);
        assert!(matches!(&s.body[1], Program::DoVariant { body, .. } if body.len() == 1));
        assert!(s.vocab.contains("b"));
    }

    #[test]
    fn rejects_token_variant() {
        let v = Vocabulary::functional([("e", 0)]).unwrap();
        let mut b = ProgramBuilder::new(v);
        assert!(b.do_variant("true", &["e"], |_| Ok(())).is_err());
    }
}
