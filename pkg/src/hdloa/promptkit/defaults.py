"""Ready-made demonstrations and heuristic lists for the four tasks.

EAE exemplars use short synthetic documents; the classification
exemplars are the SST-2 and SNLI demonstrations with their pattern lists.
"""

from __future__ import annotations

from ..core import ClassificationInstance, EAEInstance, Heuristic, Provenance, TaskKind, Trigger
from .builder import Style, answer_cue, render_question
from .exemplars import Application, Exemplar, RoleWalkthrough


def _manual(pairs) -> tuple[Heuristic, ...]:
    return tuple(Heuristic(label, body, Provenance.MANUAL, i) for i, (label, body) in enumerate(pairs))


EAE_HEURISTICS = _manual([
    ("Semantic", "[giver] is the person, group, or organization in the document that gives the grant or gift."),
    ("Syntactic", "The [giver] may be recognized by analyzing sentence structure, often appearing before "
                  "prepositional phrases starting with 'to' that introduce the recipient "
                  "(e.g., \"X gives Y to Z\", X is the 'giver')."),
    ("Dependency Parsing", "In parsing the sentence structure, the [giver] is often connected through a "
                           "dependency relation (e.g., 'nsubj' for nominal subject) to the main verb "
                           "representing the giving action."),
])

SST2_PATTERNS = _manual([
    ("Overall Context", "Examine the general tone of the entire sentence. Determine if it overall express a "
                        "positive or negative sentiment, regardless of individual words."),
    ("Descriptive Phrases", "Identify key adjectives or descriptive phrases that convey strong feelings or "
                            "opinions about the subject."),
    ("Negation Handling", "Look for negative words like \"not,\" \"didn't,\" or \"never\" that might reverse "
                          "the sentiment of the words following them. Ensure the reversed sentiment is "
                          "understood correctly."),
    ("Comparatives", "Search for words or phrases that compare the subject to something else, suggesting "
                     "superiority, inferiority, or equality."),
    ("Adverbs and Intensifiers", "Spot adverbs or intensifiers that amplify the sentiment of the associated "
                                 "adjective or verb. They often provide a clue about the strength of the "
                                 "sentiment."),
])

# Two entries share a label in the original list; both are kept.
SNLI_PATTERNS = _manual([
    ("Explicit Evidence", "When the hypothesis directly restates or paraphrases information present in the "
                          "premise, i.e., premise provides direct evidence that supports the hypothesis, the "
                          "answer is \"yes\"."),
    ("Explicit Contradiction", "The hypothesis contains information that directly negates or opposes a clear "
                               "statement in the premise. If this condition is met, the answer is \"no\"."),
    ("Confident Neutral", "If it is very certain that the hypothesis neither contradicts nor supports the "
                          "premise in any evident or implicit manner, and the relationship between them is "
                          "clearly independent, the answer is \"it is not possible to tell\"."),
    ("Implicit Contradiction or Neutral", "In this case, no direct contradiction is found. If the hypothesis, "
                                          "when extended logically, negates or conflicts with any part of the "
                                          "premise, even if not directly. If it does, it leans towards "
                                          "contradiction ('no'). If no such implicit contradiction is found and "
                                          "the relationship between hypothesis and premise remains ambiguous, "
                                          "it could be neutral (it is not possible to tell)."),
    ("Implicit Evidence or Neutral", "In cases where no direct evidence in the premise supports the hypothesis, "
                                     "the following steps should be applied: Check each element of the "
                                     "hypothesis against the premise. If each element of the hypothesis, when "
                                     "drawing from the premise using world knowledge or logical reasoning, one "
                                     "can infer or reasonably support the entire hypothesis, it leans towards "
                                     "implicit entailment ('yes'). If any part of the hypothesis lacks "
                                     "inferable evidence from the premise or if the connection between the "
                                     "entire hypothesis and premise remains ambiguous, it leans towards neutral "
                                     "('it is not possible to tell')."),
    ("Implicit Contradiction or Neutral", "In cases where no direct evidence in the premise negates the "
                                          "hypothesis, the following steps should be applied: Check each "
                                          "element of the hypothesis against the premise. If any element of the "
                                          "hypothesis, when juxtaposed with the premise and utilizing world "
                                          "knowledge or logical reasoning, can subtly negate or contradict any "
                                          "part of the premise, it leans towards implicit contradiction ('no'). "
                                          "If each element of the hypothesis does not provide such subtle "
                                          "contradictions or if the connection between the entire hypothesis "
                                          "and premise remains ambiguous, it leans towards neutral "
                                          "('it is not possible to tell')."),
])

_RAMS_DOC = ("The access to the research center in the city was granted by the administrator. "
             "The man, Ripley Johnson, earned it.")
_RAMS_TRIGGER_AT = _RAMS_DOC.index("granted")

RAMS_EXEMPLAR_INSTANCE = EAEInstance(
    id="rams-demo",
    document=_RAMS_DOC,
    event_type="transaction.transaction.giftgrantprovideaid",
    roles=("giver", "beneficiary", "recipient"),
    gold={"giver": ("administrator",), "recipient": ("Ripley Johnson",)},
    trigger=Trigger("granted", _RAMS_TRIGGER_AT, _RAMS_TRIGGER_AT + len("granted")),
)

RAMS_EXEMPLAR = Exemplar.for_eae(
    render_question(TaskKind.EAE_RAMS, RAMS_EXEMPLAR_INSTANCE),
    elaboration=(
        "Elaborate the meaning of event type and its argument roles:\n"
        '"transaction.transaction.giftgrantprovideaid": The event involves a transfer of money or resources '
        "in the form of a gift, grant, or provision of aid, signaled by the action of granting.\n"
        "[giver]: the giver is the person, group, or organization that provides or grants money, resources, "
        "or access in the event.\n"
        "[beneficiary]: the beneficiary is the party who ultimately benefits from the transaction.\n"
        "[recipient]: the recipient is the entity that receives the money, resources, or access granted in "
        "the event."
    ),
    walkthroughs=[
        RoleWalkthrough(
            role="giver",
            selected=("Semantic", "Syntactic"),
            applications=(
                Application("Semantic", "[giver] is the person, group, or organization that gives the grant "
                            "or gift in the document",
                            "Applying this heuristic to the document, the entity that gives access of the "
                            'research center is "administrator".'),
                Application("Syntactic", "The [giver] may be recognized by analyzing sentence structure, often "
                            "appearing before prepositional phrases starting with 'to' that introduce the "
                            "recipient (e.g., 'X gives Y to Z', X is the 'giver')",
                            "Applying this heuristic to the given document, the entity that granted access to "
                            "the research center is 'research center'."),
            ),
            candidates=("administrator", "research center"),
            reevaluation=(
                'Is argument "administrator" alignment with the argument role [giver]? Yes, because '
                '"administrator" is directly responsible for the action of granting, establishing their role '
                "as the provider of access in the event.",
                'Is argument "research center" alignment with the argument role [giver]? No, because '
                '"research center" is the place that access has been granted to, but it doesn\'t give access.',
            ),
            answer=("administrator",),
        ),
        RoleWalkthrough(
            role="beneficiary",
            selected=("Semantic",),
            applications=(
                Application("Semantic", "[beneficiary] is the entity that ultimately benefits from the gift "
                            "or grant",
                            "Applying this heuristic to the given document, the entity that ultimately "
                            'benefits from the grant is "not specified".'),
            ),
            candidates=("not specified",),
            reevaluation=(
                'Is argument "not specified" alignment with the argument role [beneficiary]? Yes, because the '
                '[beneficiary] is not explicitly mentioned so "not specified" is correct.',
            ),
            answer=(),
        ),
        RoleWalkthrough(
            role="recipient",
            selected=("Semantic", "Dependency Parsing"),
            applications=(
                Application("Semantic", "[recipient] is the entity that receives the gift or grant",
                            "Applying this heuristic to the given document, the entity that receives the gift "
                            'or grant is "Ripley Johnson".'),
                Application("Dependency Parsing", "[recipient] is often highlighted in the sentence through a "
                            "dependency relation that denotes the receiver of the action, such as 'dobj' "
                            "(direct object) for direct transactions linked to the main verb of the event",
                            "Applying this heuristic to the given document, the entity connected to the verb "
                            "'granted' through a dobj relation is \"Ripley Johnson\"."),
            ),
            candidates=("Ripley Johnson",),
            reevaluation=(
                'Is argument "Ripley Johnson" alignment with the argument role [recipient]? Yes, because phrase '
                '"earned it" implies that "Ripley Johnson" was the intended recipient of the access, aligning '
                "with the role of [recipient] in the context of the event.",
            ),
            answer=("Ripley Johnson",),
        ),
    ],
    reasoning=(
        "The trigger \"granted\" describes access being given. The one who granted it is the administrator, "
        "so the giver is \"administrator\". Ripley Johnson earned the access, so he received it. "
        "Nobody else is said to benefit."
    ),
)

_DOCEE_DOC = ("A strong earthquake struck the coastal province on Sunday. The magnitude 6.6 shock claimed 142 "
              "deaths and 800 houses were damaged, officials said.")

DOCEE_EXEMPLAR_INSTANCE = EAEInstance(
    id="docee-demo",
    document=_DOCEE_DOC,
    event_type="Earthquakes",
    roles=("Date", "Casualties and Losses", "Magnitude", "Number of Destroyed Building"),
    gold={"Casualties and Losses": ("claimed 142 deaths", "800 houses were damaged"), "Magnitude": ("6.6",)},
    domain_tag="normal",
)


def _docee_walk(role, adapted, finding, candidates, reevaluation, answer):
    return RoleWalkthrough(role, ("Semantic",), (Application("Semantic", adapted, finding),),
                           candidates, reevaluation, answer)


DOCEE_EXEMPLAR = Exemplar.for_eae(
    render_question(TaskKind.EAE_DOCEE, DOCEE_EXEMPLAR_INSTANCE),
    elaboration=(
        "Elaborate the meaning of event type and its argument roles:\n"
        "'Earthquakes': The event involves the shaking of the surface of the Earth resulting from a sudden "
        "release of energy in the Earth's lithosphere.\n"
        "[Date]: the time when the earthquake occurred.\n"
        "[Casualties and Losses]: the number of people killed or injured, and the amount of economic losses "
        "caused by the earthquake.\n"
        "[Magnitude]: the measure of the size or intensity of the earthquake.\n"
        "[Number of Destroyed Building]: the number of buildings or structures that were damaged or destroyed "
        "due to the earthquake."
    ),
    walkthroughs=[
        _docee_walk(
            "Date", "[Date] is the time when the earthquake occurred",
            'Applying this heuristic to the document, the time when the earthquake occurred is "not specified".',
            ("not specified",),
            ('Is argument "not specified" alignment with the argument role [Date]? Yes, because the document '
             'only says "on Sunday" without a date, so "not specified" is correct.',),
            (),
        ),
        _docee_walk(
            "Casualties and Losses",
            "[Casualties and Losses] is the number of people killed or injured, and the amount of economic "
            "losses caused by the earthquake",
            'Applying this heuristic to the document, the [Casualties and Losses] is "claimed 142 deaths" and '
            '"800 houses were damaged".',
            ("claimed 142 deaths", "800 houses were damaged"),
            ('Is argument "claimed 142 deaths" alignment with the argument role [Casualties and Losses]? Yes, '
             'because "claimed 142 deaths" provides details about the number of people killed due to the '
             "earthquake, aligning with the argument role [Casualties and Losses].",
             'Is argument "800 houses were damaged" alignment with the argument role [Casualties and Losses]? '
             "Yes, because it describes the extent of economic losses caused by the earthquake, aligning with "
             "the role of [Casualties and Losses]."),
            ("claimed 142 deaths", "800 houses were damaged"),
        ),
        _docee_walk(
            "Magnitude", "[Magnitude] is the measure of the size or intensity of the earthquake",
            'Applying this heuristic to the given document, the magnitude of the earthquake is "6.6".',
            ("6.6",),
            ('Is argument "6.6" alignment with the argument role [Magnitude]? Yes, because "The magnitude 6.6 '
             'shock" indicate the size of the earthquake.',),
            ("6.6",),
        ),
        _docee_walk(
            "Number of Destroyed Building",
            "[Number of Destroyed Building] is the number of buildings or structures that were damaged or "
            "destroyed due to the earthquake",
            "Applying this heuristic to the document, the number of buildings or structures that were destroyed "
            'due to the earthquake is "800 houses were damaged".',
            ("800 houses were damaged",),
            ('Is argument "800 houses were damaged" alignment with the argument role [Number of Destroyed '
             "Building]? No, because the houses were damaged rather than destroyed, and the damage is already "
             "counted under [Casualties and Losses].",),
            (),
        ),
    ],
    reasoning=(
        "The earthquake had a magnitude of 6.6. It claimed 142 deaths and 800 houses were damaged, which are "
        "the casualties and losses. No calendar date is given and no building is reported destroyed."
    ),
)


def _classification_exemplar(task, instance, reasoning, cot_reasoning):
    return Exemplar(
        render_question(task, instance), answer_cue(task, instance.gold_label), reasoning,
        frozenset({instance.gold_label}),
    ), cot_reasoning


SST2_EXEMPLARS_WITH_COT = (
    _classification_exemplar(
        TaskKind.SENTIMENT,
        ClassificationInstance("sst2-demo-1", 'more than another " best man " clone by weaving a theme '
                               "throughout this funny film", "positive"),
        'Step 1: Selected Patterns: Overall Context Pattern and Descriptive Phrases Pattern (Phrases: '
        '"weaving a theme" and "funny film").\n'
        "Step 2: Apply selected patterns to identify the sentiment of the sentence independently.\n"
        "Step 2.1: Based on Overall Context pattern: The entirety of the sentence portrays a film that is "
        "superior and offers added value, emphasizing its distinctiveness and humorous quality. The overall "
        "sentiment is positive.\n"
        "Step 2.2: Based on Descriptive Phrases pattern: The descriptive phrases highlight a positive "
        "sentiment in the film being more than just a clone and having a funny theme. The sentiment is "
        "positive.\n"
        "Step 3: Re-evaluate sentiment:",
        "The film is called funny and more than a clone, which is praise.",
    ),
    _classification_exemplar(
        TaskKind.SENTIMENT,
        ClassificationInstance("sst2-demo-2", "contains no wit , only labored gags", "negative"),
        'Step 1: Selected Patterns: Overall Context Pattern and Negation Handling Pattern (Phrase: '
        '"contains no").\n'
        "Step 2: Apply selected patterns to identify the sentiment of the sentence independently.\n"
        "Step 2.1: Based on Overall Context pattern: The entire sentence conveys a lack of genuine humor and "
        "wit, and instead presents the humor as contrived or forced. The overall sentiment is negative.\n"
        'Step 2.2: Based on Negation Handling Pattern: The negation "contains no" highlights a lack of wit. '
        'It is further emphasized by "labored gags", suggesting forced or contrived humor. Thus, the '
        "sentiment is negative regarding the quality or genuineness of the humor.\n"
        "Step 3: Re-evaluate sentiment:",
        "The sentence says the film has no wit and its jokes are labored, which is criticism.",
    ),
)

SNLI_EXEMPLARS_WITH_COT = (
    _classification_exemplar(
        TaskKind.NLI,
        ClassificationInstance("snli-demo-1", "Children smiling and waving at camera.", "yes",
                               "There are children present."),
        "Step 1: Select the most appropriate pattern: Explicit Evidence Pattern\n"
        "Step 2: Using the Explicit Evidence Pattern, the premise directly states that there are children who "
        "are smiling and waving at the camera. This information supports the hypothesis, which claims that "
        'there are children present. So, this heuristic suggest a "yes" answer.',
        "Children smiling at a camera must be present, so the hypothesis follows.",
    ),
    _classification_exemplar(
        TaskKind.NLI,
        ClassificationInstance("snli-demo-2", "A couple play in the tide with their young son.", "no",
                               "The family is sitting down for dinner."),
        "Step 1: Select the most appropriate pattern: Implicit Contradiction or Neutral Pattern\n"
        "Step 2: Using Implicit Contradiction or Neutral Pattern, although there is no contradiction in the "
        "premise describes a scene where a couple and their son are playing in the tide, which suggests they "
        "are outdoors and likely at a beach or coastal setting. The hypothesis, on the other hand, presents a "
        "scenario where the family is sitting down for dinner, typically an indoor activity. These two "
        "activities - playing in the tide and sitting down for dinner are mutually exclusive in the context "
        "of a single time frame. Because some element of the hypothesis is identified implicitly contradicts "
        'the premise. This heuristic leans towards the answer "no".',
        "A family playing in the tide cannot at the same time be sitting down for dinner.",
    ),
    _classification_exemplar(
        TaskKind.NLI,
        ClassificationInstance("snli-demo-3", "A young family enjoys feeling ocean waves lap at their feet.",
                               "it is not possible to tell",
                               "A young man and woman take their child to the beach for the first time."),
        "Step 1: Select the most appropriate pattern: Implicit Evidence or Neutral Pattern\n"
        'Step 2: Using Implicit Evidence or Neutral Pattern, "a young family" typically implies the presence '
        "of a younger couple and potentially their child, so this part can be inferred. However, the "
        "statement about it being the child's \"first time\" at the beach cannot be inferred or supported "
        "from the premise. Because not all elements of the hypothesis can be inferred or supported from the "
        'premise, this heuristic leans towards "it is not possible to tell".',
        "The premise says nothing about whether this is the first beach visit.",
    ),
)


def default_heuristics(task: TaskKind) -> tuple[Heuristic, ...]:
    task = TaskKind.parse(task)
    if task.is_eae:
        return EAE_HEURISTICS
    return SST2_PATTERNS if task is TaskKind.SENTIMENT else SNLI_PATTERNS


def default_exemplars(task: TaskKind, style: Style = Style.HDLOA) -> tuple[Exemplar, ...]:
    """Demonstrations for ``task``; CoT variants swap in a free-form rationale."""
    from dataclasses import replace

    task = TaskKind.parse(task)
    style = Style(style)
    if task.is_eae:
        ex = RAMS_EXEMPLAR if task is TaskKind.EAE_RAMS else DOCEE_EXEMPLAR
        return (ex,)
    pairs = SST2_EXEMPLARS_WITH_COT if task is TaskKind.SENTIMENT else SNLI_EXEMPLARS_WITH_COT
    if style is Style.COT:
        return tuple(replace(ex, reasoning=cot) for ex, cot in pairs)
    return tuple(ex for ex, _ in pairs)
