"""Static accessibility rule catalog over parsed element trees.

Twelve rules covering the jsx-a11y territory the workflows rely on. Each
checker is a pure function of (element, ancestry, doc); run_rules walks the
tree and collects diagnostics in deterministic order.

Elements carrying spread attributes ({...props}) are unknowable for any rule
that infers the *absence* of an attribute or child, so those rules skip them.
Rules triggered purely by the presence of a literal value still apply.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional

from . import wcag
from .markup import (
    AttrKind,
    ElementNode,
    ElementTree,
    ExpressionNode,
    Flavor,
    SourceDocument,
    Span,
    TextNode,
    iter_elements,
    parse_document,
)


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


class Applicability(Enum):
    NATIVE_ONLY = "native_only"
    ALL = "all"


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    message: str
    span: Span
    wcag_criterion: str
    severity: Severity = Severity.ERROR


class UnknownRuleError(ValueError):
    """An enabled-rules set names a rule that is not in the catalog."""


# Valid non-abstract ARIA 1.2 roles.
VALID_ROLES = frozenset(
    """alert alertdialog application article banner blockquote button caption
    cell checkbox code columnheader combobox complementary contentinfo
    definition deletion dialog directory document emphasis feed figure form
    generic grid gridcell group heading img insertion link list listbox
    listitem log main marquee math menu menubar menuitem menuitemcheckbox
    menuitemradio meter navigation none note option paragraph presentation
    progressbar radio radiogroup region row rowgroup rowheader scrollbar
    search searchbox separator slider spinbutton status strong subscript
    superscript switch tab table tablist tabpanel term textbox time timer
    toolbar tooltip tree treegrid treeitem""".split()
)

# ARIA 1.2 states and properties.
VALID_ARIA_PROPS = frozenset(
    """aria-activedescendant aria-atomic aria-autocomplete aria-busy
    aria-checked aria-colcount aria-colindex aria-colspan aria-controls
    aria-current aria-describedby aria-details aria-disabled aria-dropeffect
    aria-errormessage aria-expanded aria-flowto aria-grabbed aria-haspopup
    aria-hidden aria-invalid aria-keyshortcuts aria-label aria-labelledby
    aria-level aria-live aria-modal aria-multiline aria-multiselectable
    aria-orientation aria-owns aria-placeholder aria-posinset aria-pressed
    aria-readonly aria-relevant aria-required aria-roledescription
    aria-rowcount aria-rowindex aria-rowspan aria-selected aria-setsize
    aria-sort aria-valuemax aria-valuemin aria-valuenow aria-valuetext""".split()
)

# ARIA roles implying user interaction.
INTERACTIVE_ROLES = frozenset(
    """button checkbox combobox gridcell link listbox menuitem
    menuitemcheckbox menuitemradio option radio scrollbar searchbox slider
    spinbutton switch tab textbox treeitem""".split()
)

MOUSE_HANDLERS = ("onClick", "onMouseDown", "onMouseUp")
KEYBOARD_HANDLERS = ("onKeyDown", "onKeyUp", "onKeyPress")

_ALWAYS_INTERACTIVE_TAGS = frozenset(["button", "input", "select", "textarea"])
_ALWAYS_FOCUSABLE_TAGS = frozenset(
    ["button", "input", "select", "textarea", "iframe", "object", "embed", "summary"]
)
_CONTROL_TAGS = frozenset(
    ["input", "select", "textarea", "button", "meter", "output", "progress"]
)
_HEADING_TAGS = frozenset(["h1", "h2", "h3", "h4", "h5", "h6"])


def is_natively_interactive(element: ElementNode) -> bool:
    tag = element.tag.lower()
    if tag in _ALWAYS_INTERACTIVE_TAGS:
        return True
    if tag == "a" and element.has_attr("href"):
        return True
    return False


def is_natively_focusable(element: ElementNode) -> bool:
    tag = element.tag.lower()
    if tag in _ALWAYS_FOCUSABLE_TAGS:
        return True
    if tag in ("a", "area") and element.has_attr("href"):
        return True
    if tag in ("audio", "video") and element.has_attr("controls"):
        return True
    return False


def explicit_role_tokens(element: ElementNode) -> Optional[list[str]]:
    """Role tokens when role is a string literal; None when absent or unknowable."""
    attr = element.find_attr("role")
    if attr is None or attr.value.kind is not AttrKind.STRING:
        return None
    return (attr.value.literal or "").split()


def has_interactive_role(element: ElementNode) -> bool:
    tokens = explicit_role_tokens(element)
    return bool(tokens) and tokens[0].lower() in INTERACTIVE_ROLES


def _has_content_children(element: ElementNode) -> bool:
    for child in element.children:
        if isinstance(child, ElementNode):
            return True
        if isinstance(child, ExpressionNode):
            return True
        if isinstance(child, TextNode) and child.text.strip():
            return True
    return False


def _descendant_elements(element: ElementNode) -> Iterable[ElementNode]:
    for child in element.children:
        if isinstance(child, ElementNode):
            yield child
            yield from _descendant_elements(child)
        elif isinstance(child, ExpressionNode):
            for nested in child.elements:
                yield nested
                yield from _descendant_elements(nested)


Checker = Callable[[ElementNode, tuple[ElementNode, ...], SourceDocument], list[Diagnostic]]


@dataclass(frozen=True)
class RuleDescriptor:
    id: str
    summary: str
    wcag_criteria: tuple[str, ...]
    applicability: Applicability
    check: Checker

    @property
    def doc_url(self) -> str:
        return wcag.lookup(self.wcag_criteria[0]).reference_url


def _diag(rule: "RuleDescriptor", span: Span, message: Optional[str] = None) -> Diagnostic:
    return Diagnostic(
        rule_id=rule.id,
        message=message or rule.summary,
        span=span,
        wcag_criterion=rule.wcag_criteria[0],
        severity=Severity.ERROR,
    )


def _check_img_alt(element, ancestry, doc):
    if element.tag.lower() != "img" or element.has_spread:
        return []
    if element.has_attr("alt"):
        return []
    return [_diag(IMG_ALT_REQUIRED, element.open_tag_span)]


def _check_anchor_content(element, ancestry, doc):
    if element.tag.lower() != "a" or element.has_spread:
        return []
    if _has_content_children(element):
        return []
    return [_diag(ANCHOR_HAS_CONTENT, element.open_tag_span)]


def _check_click_key_events(element, ancestry, doc):
    if element.has_spread or is_natively_interactive(element):
        return []
    if not element.has_attr("onClick"):
        return []
    if element.has_attr(*KEYBOARD_HANDLERS):
        return []
    return [_diag(CLICK_EVENTS_HAVE_KEY_EVENTS, element.open_tag_span)]


def _check_noninteractive_interactions(element, ancestry, doc):
    if element.has_spread or not element.is_known_html_element():
        return []
    if is_natively_interactive(element):
        return []
    if not element.has_attr(*MOUSE_HANDLERS, *KEYBOARD_HANDLERS):
        return []
    role_attr = element.find_attr("role")
    if role_attr is not None and role_attr.value.kind is not AttrKind.STRING:
        return []  # role unknowable
    if has_interactive_role(element):
        return []
    return [_diag(NO_NONINTERACTIVE_ELEMENT_INTERACTIONS, element.open_tag_span)]


def _check_aria_role(element, ancestry, doc):
    attr = element.find_attr("role")
    if attr is None:
        return []
    if attr.value.kind is AttrKind.EXPRESSION:
        return []
    tokens = (attr.value.literal or "").split() if attr.value.kind is AttrKind.STRING else []
    if tokens and all(t.lower() in VALID_ROLES for t in tokens):
        return []
    bad = next((t for t in tokens if t.lower() not in VALID_ROLES), None)
    detail = f"'{bad}' is not a valid, non-abstract ARIA role." if bad else ARIA_ROLE_VALID.summary
    return [_diag(ARIA_ROLE_VALID, attr.span, detail)]


def _check_aria_props(element, ancestry, doc):
    out = []
    for attr in element.attributes:
        if attr.is_spread:
            continue
        name = attr.name.lower()
        if name.startswith("aria-") and name not in VALID_ARIA_PROPS:
            out.append(
                _diag(ARIA_PROPS_VALID, attr.span, f"'{attr.name}' is not a valid ARIA attribute.")
            )
    return out


def _is_true_valued(attr) -> bool:
    if attr.value.kind is AttrKind.BARE_TRUE:
        return True
    if attr.value.kind is AttrKind.STRING:
        return (attr.value.literal or "").strip().lower() == "true"
    return False


def _check_aria_hidden_label(element, ancestry, doc):
    hidden = element.find_attr("aria-hidden")
    if hidden is None or not _is_true_valued(hidden):
        return []
    if not element.has_attr("aria-label", "aria-labelledby"):
        return []
    return [_diag(NO_ARIA_HIDDEN_WITH_LABEL, element.open_tag_span)]


def _check_interactive_supports_focus(element, ancestry, doc):
    if element.has_spread:
        return []
    tokens = explicit_role_tokens(element)
    if not tokens or tokens[0].lower() not in INTERACTIVE_ROLES:
        return []
    if is_natively_focusable(element) or element.has_attr("tabIndex", "tabindex"):
        return []
    role = tokens[0].lower()
    return [
        _diag(
            INTERACTIVE_SUPPORTS_FOCUS,
            element.open_tag_span,
            f"Elements with the '{role}' interactive role must be focusable.",
        )
    ]


def _check_label_control(element, ancestry, doc):
    if element.tag.lower() != "label" or element.has_spread:
        return []
    if element.has_attr("htmlFor", "for"):
        return []
    for descendant in _descendant_elements(element):
        if descendant.tag.lower() in _CONTROL_TAGS:
            return []
    return [_diag(LABEL_HAS_ASSOCIATED_CONTROL, element.open_tag_span)]


def _check_no_autofocus(element, ancestry, doc):
    attr = element.find_attr("autoFocus", "autofocus")
    if attr is None:
        return []
    return [_diag(NO_AUTOFOCUS, attr.span)]


def _check_heading_content(element, ancestry, doc):
    if element.tag.lower() not in _HEADING_TAGS or element.has_spread:
        return []
    if _has_content_children(element):
        return []
    return [_diag(HEADING_HAS_CONTENT, element.open_tag_span)]


def _check_html_lang(element, ancestry, doc):
    if element.tag.lower() != "html" or element.has_spread:
        return []
    if element.has_attr("lang"):
        return []
    return [_diag(HTML_HAS_LANG, element.open_tag_span)]


IMG_ALT_REQUIRED = RuleDescriptor(
    "img-alt-required",
    "img elements must have an alt attribute, meaningful or empty for decorative images.",
    ("1.1.1",),
    Applicability.NATIVE_ONLY,
    _check_img_alt,
)
ANCHOR_HAS_CONTENT = RuleDescriptor(
    "anchor-has-content",
    "Anchors must have content that is accessible to screen readers.",
    ("2.4.4",),
    Applicability.NATIVE_ONLY,
    _check_anchor_content,
)
CLICK_EVENTS_HAVE_KEY_EVENTS = RuleDescriptor(
    "click-events-have-key-events",
    "Visible, non-interactive elements with click handlers must have at least one keyboard listener.",
    ("2.1.1",),
    Applicability.NATIVE_ONLY,
    _check_click_key_events,
)
NO_NONINTERACTIVE_ELEMENT_INTERACTIONS = RuleDescriptor(
    "no-noninteractive-element-interactions",
    "Non-interactive elements should not be assigned mouse or keyboard event listeners.",
    ("4.1.2",),
    Applicability.NATIVE_ONLY,
    _check_noninteractive_interactions,
)
ARIA_ROLE_VALID = RuleDescriptor(
    "aria-role-valid",
    "Elements with an ARIA role must use a valid, non-abstract role.",
    ("4.1.2",),
    Applicability.ALL,
    _check_aria_role,
)
ARIA_PROPS_VALID = RuleDescriptor(
    "aria-props-valid",
    "ARIA attributes must use valid names.",
    ("4.1.2",),
    Applicability.ALL,
    _check_aria_props,
)
NO_ARIA_HIDDEN_WITH_LABEL = RuleDescriptor(
    "no-aria-hidden-with-label",
    "aria-label or aria-labelledby must not be used on an element hidden with aria-hidden.",
    ("4.1.2",),
    Applicability.ALL,
    _check_aria_hidden_label,
)
INTERACTIVE_SUPPORTS_FOCUS = RuleDescriptor(
    "interactive-supports-focus",
    "Elements with an interactive role must be focusable.",
    ("2.1.1",),
    Applicability.NATIVE_ONLY,
    _check_interactive_supports_focus,
)
LABEL_HAS_ASSOCIATED_CONTROL = RuleDescriptor(
    "label-has-associated-control",
    "A form label must be associated with a control.",
    ("3.3.2",),
    Applicability.NATIVE_ONLY,
    _check_label_control,
)
NO_AUTOFOCUS = RuleDescriptor(
    "no-autofocus",
    "The autoFocus attribute should not be used; it reduces usability and accessibility.",
    ("3.2.1",),
    Applicability.ALL,
    _check_no_autofocus,
)
HEADING_HAS_CONTENT = RuleDescriptor(
    "heading-has-content",
    "Headings must have content that is accessible to screen readers.",
    ("2.4.6",),
    Applicability.NATIVE_ONLY,
    _check_heading_content,
)
HTML_HAS_LANG = RuleDescriptor(
    "html-has-lang",
    "The html element must have a lang attribute.",
    ("3.1.1",),
    Applicability.NATIVE_ONLY,
    _check_html_lang,
)

CATALOG: dict[str, RuleDescriptor] = {
    r.id: r
    for r in [
        IMG_ALT_REQUIRED,
        ANCHOR_HAS_CONTENT,
        CLICK_EVENTS_HAVE_KEY_EVENTS,
        NO_NONINTERACTIVE_ELEMENT_INTERACTIONS,
        ARIA_ROLE_VALID,
        ARIA_PROPS_VALID,
        NO_ARIA_HIDDEN_WITH_LABEL,
        INTERACTIVE_SUPPORTS_FOCUS,
        LABEL_HAS_ASSOCIATED_CONTROL,
        NO_AUTOFOCUS,
        HEADING_HAS_CONTENT,
        HTML_HAS_LANG,
    ]
}

assert all(
    wcag.is_valid_criterion(c) for r in CATALOG.values() for c in r.wcag_criteria
), "rule catalog references an unknown WCAG criterion"


def run_rules(
    tree: ElementTree,
    doc: SourceDocument,
    enabled: Optional[set[str]] = None,
) -> list[Diagnostic]:
    """Run enabled rules over every element; deterministic output order."""
    if enabled is None:
        active = list(CATALOG.values())
    else:
        unknown = sorted(set(enabled) - set(CATALOG))
        if unknown:
            raise UnknownRuleError(f"unknown rule id(s): {', '.join(unknown)}")
        active = [CATALOG[rid] for rid in sorted(enabled)]

    diagnostics: list[Diagnostic] = []
    for element, ancestry in iter_elements(tree):
        custom = element.is_custom_component(doc.flavor)
        for rule in active:
            if custom and rule.applicability is Applicability.NATIVE_ONLY:
                continue
            diagnostics.extend(rule.check(element, ancestry, doc))
    diagnostics.sort(key=lambda d: (d.span.start, d.rule_id))
    return diagnostics


def scan_text(
    text: str, path: str = "<memory>", flavor: Optional[Flavor] = None,
    enabled: Optional[set[str]] = None,
) -> list[Diagnostic]:
    """Convenience: parse then run rules."""
    doc = SourceDocument.from_text(text, path=path, flavor=flavor)
    return run_rules(parse_document(doc), doc, enabled)
