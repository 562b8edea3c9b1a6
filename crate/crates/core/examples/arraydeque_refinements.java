// Our own protocol for ArrayDeque, written for this corpus. The JDK documents
// no object states for it; removeFirst requiring nonempty is our choice.
@ExternalRefinementsFor("java.util.ArrayDeque")
@StateSet({"empty", "nonempty"})
public interface ArrayDequeRefinements {
    @StateRefinement(to="empty(this)")
    public void ArrayDeque();

    @StateRefinement(to="nonempty(this)")
    public void addLast(int e);

    @StateRefinement(from="nonempty(this)", to="nonempty(this)")
    public int getFirst();

    @StateRefinement(from="nonempty(this)", to="empty(this)")
    @StateRefinement(from="nonempty(this)", to="nonempty(this)")
    public int removeFirst();

    @StateRefinement(to="empty(this)")
    public void clear();
}

