from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from sbp.utils import (
    has_required_args,
    is_valid_name,
    render_name,
    setting,
    split_path,
    validate_name,
)


class HasRequiredArgsTestCase(SimpleTestCase):
    def test_simple_no_args_function(self):
        def testfunc():
            pass

        self.assertFalse(has_required_args(testfunc))

    def test_simple_1_arg_function(self):
        def testfunc(foo):
            pass

        self.assertEqual(1, has_required_args(testfunc))

    def test_simple_1_arg_function_with_default(self):
        def testfunc(foo=2):
            pass

        self.assertFalse(has_required_args(testfunc))

    def test_simple_2_arg_function(self):
        def testfunc(foo, bar):
            pass

        self.assertEqual(2, has_required_args(testfunc))

    def test_simple_2_arg_function_with_one_default(self):
        def testfunc(foo, bar=3):
            pass

        self.assertEqual(1, has_required_args(testfunc))

    def test_variadic_function_can_be_called_bare(self):
        def testfunc(*args, **kwargs):
            pass

        self.assertEqual(0, has_required_args(testfunc))

    def test_class_function_no_args(self):
        class TestClass(object):
            def func(self):
                pass

        self.assertFalse(has_required_args(TestClass.func))

    def test_class_function_1_arg(self):
        class TestClass(object):
            def func(self, foo):
                pass

        self.assertEqual(1, has_required_args(TestClass.func))

    def test_class_function_2_args_1_default(self):
        class TestClass(object):
            def func(self, foo, bar=2):
                pass

        self.assertEqual(1, has_required_args(TestClass.func))


class ValidateNameTest(SimpleTestCase):
    def test_plain_names(self):
        for name in ("w", "chicken1", "cornOfWisdom", "x'", "Grüße", "a-b"):
            self.assertEqual(name, validate_name(name))

    def test_bad_names(self):
        for name in ("", "a.b", "a b", "tab\there", "new\nline", None, 3):
            with self.assertRaises(ValidationError):
                validate_name(name)
            self.assertFalse(is_valid_name(name))


class RenderNameTest(SimpleTestCase):
    def test_identifiers_are_bare(self):
        self.assertEqual("chicken1", render_name("chicken1"))

    def test_other_names_are_quoted(self):
        self.assertEqual('"a-b"', render_name("a-b"))
        self.assertEqual('"1st"', render_name("1st"))


class SplitPathTest(SimpleTestCase):
    def test_segments(self):
        self.assertEqual(["w"], split_path("w"))
        self.assertEqual(["w", "ch"], split_path("w.ch"))
        self.assertEqual(["w", "ch", "loc"], split_path("w.ch.loc"))

    def test_quoted_segments(self):
        self.assertEqual(["w", "a-b", "loc"], split_path('w."a-b".loc'))

    def test_too_many_segments(self):
        with self.assertRaises(ValidationError):
            split_path("w.ch.loc.x")

    def test_empty_segments(self):
        for spec in ("", "w.", "w..loc", ".w"):
            with self.assertRaises(ValidationError):
                split_path(spec)

    def test_unterminated_quote(self):
        with self.assertRaises(ValidationError):
            split_path('w."ch')


class SettingTest(SimpleTestCase):
    @override_settings(SBP={"WORKERS": 4})
    def test_configured(self):
        self.assertEqual(4, setting("WORKERS"))

    @override_settings(SBP={})
    def test_default(self):
        self.assertEqual(1, setting("WORKERS", 1))
        self.assertIsNone(setting("TRACE_DIR"))
