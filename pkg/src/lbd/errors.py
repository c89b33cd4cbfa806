"""Exception hierarchy shared across the pipeline stages."""


class LbdError(Exception):
    """Base class for all pipeline errors."""


class MalformedRecord(LbdError):
    def __init__(self, line_no, reason=""):
        self.line_no = line_no
        super().__init__(f"malformed record at line {line_no}: {reason}")


class DuplicateDocId(LbdError):
    def __init__(self, doc_id):
        self.doc_id = doc_id
        super().__init__(f"duplicate doc_id {doc_id!r}")


class IoFailure(LbdError):
    pass


class DuplicateSentence(LbdError):
    def __init__(self, sent_id):
        self.sent_id = sent_id
        super().__init__(f"duplicate sentence {sent_id!r}")


class NodeNotFound(LbdError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"node not found: {node_id!r}")


class NoPath(LbdError):
    def __init__(self, src, dst):
        self.src = src
        self.dst = dst
        super().__init__(f"no path between {src!r} and {dst!r}")


class EmptyPath(LbdError):
    pass


class EmptyGraph(LbdError):
    pass


class InsufficientCodedTerms(LbdError):
    pass


class MissingEmbedding(LbdError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"missing embedding for {node_id!r}")


class SamePair(LbdError):
    pass


class EmptyCorpus(LbdError):
    pass


class TooFewPoints(LbdError):
    pass


class MissingArtifact(LbdError):
    pass


class InvalidConfig(LbdError):
    pass
