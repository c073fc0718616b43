"""ontoforge: from annotated specification notes to a refined OWL/RDF ontology.

The pipeline has four legs:

* ``vault``      -- scan a Markdown note vault, back-populate concept notes,
                    rank concepts, extract context bundles.
* ``schema`` / ``classgen`` / ``instancegen`` -- parse a constrained XSD,
                    translate it to ontology classes, then populate instances
                    from an XML document with structural deduplication.
* ``refine``     -- judge merge candidates with a pluggable true/false oracle,
                    find cliques of mergeable instances, apply reversible merges.
* ``evaluate``   -- score pairwise and grouping oracles against a ground truth.

``ontoforge.cli`` wires the legs into subcommands.
"""

__version__ = "0.1.0"
