"""
TDL, the transition description language.

The package is split the usual way: `lexer` turns source text into tokens,
`parser` builds the tree defined in `nodes`, `checker` reports static
problems, `interpreter` runs one segment of a program against a snapshot and
`printer` turns a tree back into source. Import the submodules directly;
this module stays empty so `sbp.updates` can use the lexer without pulling
in the interpreter.
"""
