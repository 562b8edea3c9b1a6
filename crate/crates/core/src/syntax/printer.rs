//! Pretty-printer producing re-parseable source for a parsed program.

use super::ast::*;

pub fn print_units(units: &[TypeDecl]) -> String {
    let mut p = Printer::default();
    for (i, u) in units.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        p.type_decl(u);
    }
    p.out
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

pub fn annotation_text(a: &RawAnnotation) -> String {
    let body = match &a.payload {
        AnnotationPayload::Single(s) => quote(&s.value),
        AnnotationPayload::List(items) => {
            let parts: Vec<String> = items.iter().map(|s| quote(&s.value)).collect();
            format!("{{{}}}", parts.join(", "))
        }
        AnnotationPayload::Transition { from, to } => {
            let mut parts = Vec::new();
            if let Some(f) = from {
                parts.push(format!("from = {}", quote(&f.value)));
            }
            if let Some(t) = to {
                parts.push(format!("to = {}", quote(&t.value)));
            }
            parts.join(", ")
        }
    };
    format!("@{}({})", a.kind.name(), body)
}

pub fn expr_text(e: &Expr) -> String {
    let mut s = String::new();
    expr(e, 0, &mut s);
    s
}

fn expr(e: &Expr, min_prec: u8, out: &mut String) {
    match &e.kind {
        ExprKind::IntLit(n) => out.push_str(&n.to_string()),
        ExprKind::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Var { name, .. } => out.push_str(name),
        ExprKind::This => out.push_str("this"),
        ExprKind::Field { target, name, .. } => {
            expr(target, 8, out);
            out.push('.');
            out.push_str(&name.name);
        }
        ExprKind::Unary(op, inner) => {
            let paren = min_prec > 7;
            if paren {
                out.push('(');
            }
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            // keep `- -x` from lexing as a single token pair we do not have
            if matches!(inner.kind, ExprKind::Unary(..)) {
                out.push('(');
                expr(inner, 0, out);
                out.push(')');
            } else {
                expr(inner, 7, out);
            }
            if paren {
                out.push(')');
            }
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                out.push('(');
            }
            expr(l, prec, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            expr(r, prec + 1, out);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Call {
            receiver,
            method,
            args,
            ..
        } => {
            if let Some(r) = receiver {
                expr(r, 8, out);
                out.push('.');
            }
            out.push_str(&method.name);
            arg_list(args, out);
        }
        ExprKind::New { class, args, .. } => {
            out.push_str("new ");
            out.push_str(&class.name);
            arg_list(args, out);
        }
    }
}

fn arg_list(args: &[Expr], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(a, 0, out);
    }
    out.push(')');
}

impl Printer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn type_decl(&mut self, u: &TypeDecl) {
        for a in &u.annotations {
            self.line(&annotation_text(a));
        }
        let kw = match u.kind {
            TypeDeclKind::Class => "class",
            TypeDeclKind::Interface => "interface",
        };
        self.line(&format!("{kw} {} {{", u.name.name));
        self.indent += 1;
        for f in &u.fields {
            let mut s = String::new();
            if let Some(a) = &f.annotation {
                s.push_str(&annotation_text(a));
                s.push(' ');
            }
            if f.is_static {
                s.push_str("static ");
            }
            s.push_str(&format!("{} {}", f.ty.ty, f.name.name));
            if let Some(init) = &f.init {
                s.push_str(" = ");
                s.push_str(&expr_text(init));
            }
            s.push(';');
            self.line(&s);
        }
        for m in u.constructors.iter().chain(&u.methods) {
            self.method(m);
        }
        self.indent -= 1;
        self.line("}");
    }

    fn method(&mut self, m: &MethodDecl) {
        if let Some(a) = &m.return_annotation {
            self.line(&annotation_text(a));
        }
        for a in &m.state_annotations {
            self.line(&annotation_text(a));
        }
        let mut sig = String::new();
        if m.is_static {
            sig.push_str("static ");
        }
        if !m.is_constructor {
            sig.push_str(&format!("{} ", m.return_type.ty));
        }
        sig.push_str(&m.name.name);
        sig.push('(');
        for (i, p) in m.params.iter().enumerate() {
            if i > 0 {
                sig.push_str(", ");
            }
            if let Some(a) = &p.annotation {
                sig.push_str(&annotation_text(a));
                sig.push(' ');
            }
            sig.push_str(&format!("{} {}", p.ty.ty, p.name.name));
        }
        sig.push(')');
        match &m.body {
            None => self.line(&(sig + ";")),
            Some(b) => {
                self.line(&(sig + " {"));
                self.block_body(b);
                self.line("}");
            }
        }
    }

    fn block_body(&mut self, b: &Block) {
        self.indent += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
    }

    /// Prints `s` as the body of `if`/`while`, always braced.
    fn nested(&mut self, head: String, s: &Stmt) -> bool {
        match &s.kind {
            StmtKind::Block(b) => {
                self.line(&(head + " {"));
                self.block_body(b);
                true
            }
            _ => {
                self.line(&head);
                self.indent += 1;
                self.stmt(s);
                self.indent -= 1;
                false
            }
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::LocalDecl {
                annotation,
                ty,
                name,
                init,
            } => {
                let mut t = String::new();
                if let Some(a) = annotation {
                    t.push_str(&annotation_text(a));
                    t.push(' ');
                }
                t.push_str(&format!("{} {}", ty.ty, name.name));
                if let Some(e) = init {
                    t.push_str(" = ");
                    t.push_str(&expr_text(e));
                }
                t.push(';');
                self.line(&t);
            }
            StmtKind::Assign { target, value } => {
                self.line(&format!("{} = {};", expr_text(target), expr_text(value)))
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let braced = self.nested(format!("if ({})", expr_text(cond)), then_branch);
                match else_branch {
                    None => {
                        if braced {
                            self.line("}");
                        }
                    }
                    Some(e) => {
                        let head = if braced { "} else" } else { "else" };
                        if self.nested(head.to_string(), e) {
                            self.line("}");
                        }
                    }
                }
            }
            StmtKind::While { cond, body } => {
                if self.nested(format!("while ({})", expr_text(cond)), body) {
                    self.line("}");
                }
            }
            StmtKind::Return(None) => self.line("return;"),
            StmtKind::Return(Some(e)) => self.line(&format!("return {};", expr_text(e))),
            StmtKind::Expr(e) => self.line(&format!("{};", expr_text(e))),
            StmtKind::Block(b) => {
                self.line("{");
                self.block_body(b);
                self.line("}");
            }
        }
    }
}
