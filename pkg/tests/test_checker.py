"""Static checks: names, types, scopes, main signature, line classification."""

import pytest

from memtrace.microvm import parse_program
from memtrace.microvm.syntax import TypeDiagnostic


def check_java(stmts: str, extra: str = ""):
    source = (
        "class Demo {\n"
        + extra
        + "    public static void main(String[] args) {\n"
        + stmts
        + "\n    }\n}\n"
    )
    return parse_program(source, "java")


def check_cpp(stmts: str, prefix: str = ""):
    return parse_program(prefix + "void main() {\n" + stmts + "\n}\n", "cpp")


def java_error(stmts: str, extra: str = "") -> TypeDiagnostic:
    with pytest.raises(TypeDiagnostic) as exc_info:
        check_java(stmts, extra)
    return exc_info.value


def cpp_error(stmts: str, prefix: str = "") -> TypeDiagnostic:
    with pytest.raises(TypeDiagnostic) as exc_info:
        check_cpp(stmts, prefix)
    return exc_info.value


# -- main discovery --------------------------------------------------------------


def test_missing_main():
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program("class T { int x; }", "java")
    assert exc_info.value.message == "missing main"


def test_java_main_signatures():
    ok_no_args = "class T {\n  static void main() {\n  }\n}\n"
    assert parse_program(ok_no_args, "java").main.name == "main"
    bad = "class T {\n  static void main(int x) {\n  }\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(bad, "java")
    assert "main must take" in exc_info.value.message


def test_cpp_main_takes_no_parameters():
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program("void main(int x) {\n}\n", "cpp")
    assert exc_info.value.message == "main must take no parameters"


def test_main_must_return_void():
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program("int main() {\n  return 0;\n}\n", "cpp")
    assert exc_info.value.message == "main must return void"


# -- duplicate declarations --------------------------------------------------------


def test_duplicate_type():
    program = "class A { int x; }\nclass A { int y; }\nclass M { static void main() { } }\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(program, "java")
    assert "duplicate type 'A'" in exc_info.value.message


def test_duplicate_function():
    source = "void f() {\n}\nvoid f() {\n}\nvoid main() {\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "duplicate function 'f'" in exc_info.value.message


def test_duplicate_field():
    source = "struct S { int a; int a; };\nvoid main() {\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "duplicate field 'a'" in exc_info.value.message


def test_duplicate_parameter():
    source = "void f(int a, int a) {\n}\nvoid main() {\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "duplicate parameter 'a'" in exc_info.value.message


def test_duplicate_global():
    err = cpp_error("", prefix="int g = 1;\nint g = 2;\n")
    assert "duplicate global 'g'" in err.message


def test_duplicate_variable_function_wide():
    # redeclaration inside a nested block still collides: one frame slot per name
    err = java_error("int x = 1;\nif (true) {\nint x = 2;\n}")
    assert "duplicate variable 'x'" in err.message


def test_parameter_collides_with_local():
    source = "void f(int a) {\n  int a = 2;\n}\nvoid main() {\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "duplicate variable 'a'" in exc_info.value.message


# -- types -------------------------------------------------------------------------


def test_unknown_type():
    err = java_error("Widget w = null;")
    assert "unknown type 'Widget'" in err.message


def test_unknown_pointer_base_type():
    err = cpp_error("Widget* w = NULL;")
    assert "unknown type" in err.message


def test_record_types_visible_before_definition():
    # java classes may be declared after use
    source = (
        "class M {\n"
        "  static void main() {\n"
        "    Late x = new Late();\n"
        "  }\n"
        "}\n"
        "class Late { int v; }\n"
    )
    assert parse_program(source, "java") is not None


def test_assign_mismatched_scalar():
    err = java_error("int x = true;")
    assert "cannot assign boolean to int" in err.message


def test_null_assignable_to_references_only():
    check_java('String s = null;', extra="")
    err = java_error("int x = null;")
    assert "cannot assign" in err.message


def test_cpp_string_literals_rejected():
    err = cpp_error('char c = "hi";')
    assert err.message == "string literals are not supported in this dialect"


def test_java_local_must_be_initialized():
    err = java_error("int x;")
    assert err.message == "variable 'x' must be initialized"


def test_cpp_local_may_be_uninitialized():
    assert check_cpp("int x;\nx = 1;") is not None


def test_unknown_variable():
    err = java_error("int x = y;")
    assert "unknown variable 'y'" in err.message


def test_block_scope_visibility():
    err = java_error("if (true) {\nint inner = 1;\n}\nint out = inner;")
    assert "unknown variable 'inner'" in err.message


def test_globals_visible_in_function_bodies():
    assert check_cpp("int x = g;", prefix="int g = 4;\n") is not None


def test_global_initializer_must_be_literal():
    err = cpp_error("", prefix="int g = 1 + 2;\n")
    assert err.message == "global initializers must be literals"


def test_global_pointer_initializer_null_ok():
    prefix = "struct S { int v; };\nS* p = NULL;\n"
    assert check_cpp("int x = 1;", prefix=prefix) is not None


# -- statements ---------------------------------------------------------------------


def test_condition_must_be_bool():
    assert "condition must be boolean" in java_error("if (1) {\n}").message
    assert "condition must be bool" in cpp_error("while (1) {\n}").message


def test_void_return_cannot_carry_value():
    err = java_error("return 1;")
    assert "cannot return a value from a void function" in err.message


def test_missing_return_value():
    source = "int f() {\n  return;\n}\nvoid main() {\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert exc_info.value.message == "missing return value"


def test_return_type_mismatch():
    source = "int f() {\n  return true;\n}\nvoid main() {\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "cannot return bool from a function returning int" in exc_info.value.message


def test_void_value_used():
    extra = "    static void noop() {\n    }\n"
    err = java_error("int x = noop();", extra=extra)
    assert err.message == "void value used"


def test_void_call_statement_allowed():
    extra = "    static void noop() {\n    }\n"
    assert check_java("noop();", extra=extra) is not None


# -- calls ---------------------------------------------------------------------------


def test_unknown_function():
    err = java_error("mystery();")
    assert "unknown function 'mystery'" in err.message


def test_call_arity_checked():
    source = "int f(int a) {\n  return a;\n}\nvoid main() {\n  int x = f(1, 2);\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "argument" in exc_info.value.message


def test_call_argument_types_checked():
    source = "int f(int a) {\n  return a;\n}\nvoid main() {\n  int x = f(true);\n}\n"
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "cpp")
    assert "cannot" in exc_info.value.message or "argument" in exc_info.value.message


# -- field access and pointers ---------------------------------------------------------


def test_java_dot_on_non_record():
    err = java_error("int x = 1;\nint y = x.f;")
    assert "has no fields" in err.message


def test_unknown_field():
    extra_record = "class Node { int v; }\n"
    source = (
        "class M {\n"
        "  static void main() {\n"
        "    Node n = new Node();\n"
        "    int x = n.missing;\n"
        "  }\n"
        "}\n" + extra_record
    )
    with pytest.raises(TypeDiagnostic) as exc_info:
        parse_program(source, "java")
    assert "no field 'missing'" in exc_info.value.message or "missing" in exc_info.value.message


def test_cpp_dot_requires_deref():
    prefix = "struct S { int v; };\n"
    err = cpp_error("S* p = new S();\nint x = p.v;", prefix=prefix)
    assert err.message == "'.' requires a struct value; use '->'"


def test_cpp_paren_deref_dot_ok():
    prefix = "struct S { int v; };\n"
    assert check_cpp("S* p = new S();\nint x = (*p).v;", prefix=prefix) is not None


def test_arrow_requires_struct_pointer():
    err = cpp_error("int x = 1;\nint y = x->v;")
    assert "'->' requires a struct pointer" in err.message


def test_deref_non_pointer():
    err = cpp_error("int x = 1;\nint y = *x;")
    assert err.message == "cannot dereference a non-pointer"


def test_cpp_bare_struct_type_rejected():
    prefix = "struct S { int v; };\n"
    err = cpp_error("S q;", prefix=prefix)
    assert "unknown type 'S'" in err.message


def test_deref_struct_pointer_value_rejected():
    prefix = "struct S { int v; };\n"
    err = cpp_error("S* p = new S();\nint x = *p;", prefix=prefix)
    assert err.message == "cannot use a struct value directly; access a field"


def test_whole_struct_assignment_through_pointer_rejected():
    prefix = "struct S { int v; };\n"
    err = cpp_error("S* p = new S();\n*p = *p;", prefix=prefix)
    assert "struct" in err.message or "pointer" in err.message


def test_address_of_requires_place():
    err = cpp_error("int* p = &3;")
    assert err.message == "'&' requires a variable or field"


def test_address_of_variable_and_field():
    prefix = "struct S { int v; };\n"
    stmts = "int x = 1;\nint* p = &x;\nS* s = new S();\nint* q = &s->v;"
    assert check_cpp(stmts, prefix=prefix) is not None


def test_new_requires_known_record():
    err = java_error("Object o = new Object();")
    assert "unknown type" in err.message


def test_cpp_new_yields_pointer():
    prefix = "struct S { int v; };\n"
    err = cpp_error("int* q = new S();", prefix=prefix)
    assert "cannot assign S* to int*" in err.message


# -- operators ----------------------------------------------------------------------


def test_arithmetic_requires_ints():
    err = java_error("int x = true + 1;")
    assert "'+' requires int operands" in err.message


def test_comparison_requires_ints():
    err = java_error("boolean b = true < false;")
    assert "'<' requires int operands" in err.message


def test_logic_requires_bools():
    err = java_error("boolean b = 1 && 2;")
    assert "'&&' requires boolean operands" in err.message


def test_equality_needs_compatible_operands():
    err = java_error("boolean b = 1 == true;")
    assert "cannot compare int with boolean" in err.message


def test_equality_reference_vs_null():
    assert check_java('String s = "x";\nboolean b = s == null;') is not None


def test_unary_minus_requires_int():
    err = java_error("int x = -true;")
    assert "unary '-' requires int" in err.message


def test_not_requires_bool():
    err = java_error("boolean b = !1;")
    assert "'!'" in err.message


# -- line classification ----------------------------------------------------------


def test_executable_exit_and_call_lines():
    source = (
        "int twice(int n) {\n"  # 1
        "  int d = n * 2;\n"  # 2
        "  return d;\n"  # 3
        "}\n"  # 4  exit
        "void main() {\n"  # 5
        "  int a = 1;\n"  # 6
        "  int b = twice(a);\n"  # 7  call
        "  while (a < b) {\n"  # 8
        "    a = a + 1;\n"  # 9
        "  }\n"  # 10
        "}\n"  # 11 exit
    )
    program = parse_program(source, "cpp")
    assert program.executable_lines == frozenset({2, 3, 4, 6, 7, 8, 9, 11})
    assert program.exit_lines == frozenset({4, 11})
    assert program.call_lines == frozenset({7})


def test_call_lines_ignore_nested_bodies():
    source = (
        "void poke() {\n"  # 1
        "}\n"  # 2
        "void main() {\n"  # 3
        "  int i = 0;\n"  # 4
        "  while (i < 1) {\n"  # 5  no call in the test expr
        "    poke();\n"  # 6  the call line
        "    i = i + 1;\n"  # 7
        "  }\n"  # 8
        "}\n"  # 9
    )
    program = parse_program(source, "cpp")
    assert 6 in program.call_lines
    assert 5 not in program.call_lines


def test_record_fields_lookup():
    prefix = "struct Pair { int a; int b; };\n"
    program = check_cpp("Pair* p = new Pair();", prefix=prefix)
    assert [f.name for f in program.record_fields("Pair")] == ["a", "b"]


def test_program_keeps_source_and_dialect():
    program = check_cpp("int x = 1;")
    assert program.dialect == "cpp"
    assert "int x = 1;" in program.source
